#include "mtdata/pipeline.h"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "mtdata/corpus.h"
#include "mtdata/digest.h"
#include "mtdata/error.h"
#include "mtdata/instruct.h"
#include "mtdata/packing.h"
#include "mtdata/parallel.h"
#include "mtdata/rng.h"
#include "mtdata/scheduler.h"
#include "mtdata/vocab.h"

namespace mtdata {

namespace fs = std::filesystem;

DirectoryLock::DirectoryLock(const fs::path& dir) : lock_path_(dir / ".mtdata.lock") {
  fs::create_directories(dir);
  const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw UsageError("output directory " + dir.string() + " is locked by another run (" +
                     lock_path_.string() + ")");
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(lock_path_, ec);
}

namespace {

// Writes artifacts of one stage and remembers them for the manifest, or for
// cleanup when the stage fails.
class StageOutputs {
 public:
  StageOutputs(const fs::path& root, std::string stage, RunManifest& manifest)
      : root_(root), stage_(std::move(stage)), manifest_(manifest) {}

  fs::path path(const std::string& relative) {
    auto p = root_ / relative;
    fs::create_directories(p.parent_path());
    written_.push_back(p);
    return p;
  }

  void write(const std::string& relative, const std::string& content) {
    const auto p = path(relative);
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw DataError("cannot write " + p.string());
  }

  void commit() {
    for (const auto& p : written_) {
      manifest_.artifacts.push_back(
          {stage_, {fs::relative(p, root_).generic_string(), sha256_file(p), fs::file_size(p)}});
    }
    written_.clear();
  }

  void discard() {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
  }

  void summary(std::vector<std::pair<std::string, std::string>> values) {
    manifest_.stages.push_back({stage_, std::move(values)});
  }

 private:
  fs::path root_;
  std::string stage_;
  RunManifest& manifest_;
  std::vector<fs::path> written_;
};

template <typename Fn>
void run_stage(const std::string& name, const fs::path& root, RunManifest& manifest, Fn&& fn) {
  StageOutputs out(root, name, manifest);
  spdlog::info("stage {}: start", name);
  try {
    fn(out);
    out.commit();
  } catch (const UsageError& e) {
    out.discard();
    throw UsageError("stage " + name + ": " + e.what());
  } catch (const DataError& e) {
    out.discard();
    throw DataError("stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    out.discard();
    throw DataError("stage " + name + ": " + e.what());
  }
}

std::string to_s(uint64_t v) { return std::to_string(v); }

}  // namespace

uint64_t stage_seed(uint64_t root_seed, std::string_view stage) {
  return derive_seed(root_seed, stage);
}

std::vector<PackedDirection> pack_corpora(const CorpusMap& corpora, const Vocabulary& vocab,
                                          const PackConfig& config) {
  std::vector<const ParallelCorpus*> inputs;
  for (const auto& [dir, corpus] : corpora) inputs.push_back(&corpus);
  std::vector<std::optional<PackResult>> results(inputs.size());
  parallel_for(inputs.size(), [&](size_t i) { results[i] = pack(*inputs[i], vocab, config); });
  std::vector<PackedDirection> packed;
  packed.reserve(inputs.size());
  for (size_t i = 0; i < inputs.size(); ++i) {
    packed.push_back({inputs[i]->direction, std::move(*results[i])});
  }
  return packed;
}

std::vector<fs::path> write_packed(const fs::path& dir, std::span<const PackedDirection> packed,
                                   const PackConfig& config) {
  std::vector<fs::path> written;
  fs::create_directories(dir / "packed");
  for (const auto& p : packed) {
    const auto stem = dir / "packed" / p.direction.str();
    auto bin = stem;
    bin += ".bin";
    auto sidecar = stem;
    sidecar += ".json";
    write_samples(bin, p.result.samples);
    std::ofstream out(sidecar, std::ios::binary);
    out << report_to_json(p.result.report, p.direction, config);
    if (!out) throw DataError("cannot write " + sidecar.string());
    written.push_back(bin);
    written.push_back(sidecar);
  }
  return written;
}

std::string packed_stats_to_json(std::span<const PackedDirection> packed, size_t pack_length) {
  nlohmann::ordered_json stats;
  stats["pack_length"] = pack_length;
  auto& dirs = stats["directions"] = nlohmann::ordered_json::object();
  for (const auto& p : packed) {
    const auto& r = p.result.report;
    dirs[p.direction.str()] = {{"samples", r.samples},
                               {"pairs_packed", r.pairs_packed},
                               {"pairs_truncated", r.pairs_truncated},
                               {"padding_tokens", r.padding_tokens}};
  }
  return stats.dump(2) + "\n";
}

std::vector<PairBucket> buckets_from_packed(std::span<const PackedDirection> packed) {
  std::vector<PairBucket> buckets;
  for (const auto& p : packed) {
    buckets.push_back({p.direction, p.result.report.samples, p.result.report.samples});
  }
  return buckets;
}

RunManifest run_pipeline(const PipelineConfig& config) {
  config.validate();
  if (config.output_dir.empty()) throw UsageError("output_dir is required");
  const uint64_t root_seed = *config.seed;
  const fs::path out_dir = config.output_dir;
  DirectoryLock lock(out_dir);

  // Artifacts of an earlier run would otherwise linger as orphans.
  for (const char* stale : {"corpus", "packed"}) fs::remove_all(out_dir / stale);

  RunManifest manifest;
  manifest.tool_version = MTDATA_VERSION;
  manifest.config = config.entries();

  CorpusMap balanced;
  run_stage("balance", out_dir, manifest, [&](StageOutputs& out) {
    auto loaded = load_corpus_dir(config.corpus_dir);
    for (const auto& [dir, corpus] : loaded.corpora) {
      const auto p = config.corpus_dir / (dir.str() + ".tsv");
      manifest.inputs.push_back({dir.str() + ".tsv", sha256_file(p), fs::file_size(p)});
    }
    balanced = balance_directions(loaded.corpora, config.flip_threshold,
                                  stage_seed(root_seed, "balance"));
    for (const auto& [dir, corpus] : balanced) {
      out.path("corpus/" + dir.str() + ".tsv");
    }
    write_corpus_dir(out_dir / "corpus", balanced);
    const auto stats = compute_stats(balanced, loaded.skipped);
    out.write("corpus_stats.json", stats_to_json(stats));
    out.summary({{"input_directions", to_s(loaded.corpora.size())},
                 {"directions", to_s(balanced.size())},
                 {"pairs", to_s(stats.total_pairs)}});
  });

  std::optional<Vocabulary> vocab;
  run_stage("vocab", out_dir, manifest, [&](StageOutputs& out) {
    Vocabulary base = Vocabulary::byte_level();
    if (!config.base_vocab.empty()) {
      std::ifstream in(config.base_vocab, std::ios::binary);
      if (!in) throw DataError("cannot read base vocabulary " + config.base_vocab.string());
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      base = Vocabulary::from_json(text);
      manifest.inputs.push_back({config.base_vocab.filename().string(),
                                 sha256_file(config.base_vocab), fs::file_size(config.base_vocab)});
    }
    const auto samples =
        sample_for_vocab(balanced, config.max_num, stage_seed(root_seed, "vocab"));
    std::vector<std::string> texts;
    for (const auto& [lang, sentences] : samples) {
      texts.insert(texts.end(), sentences.begin(), sentences.end());
    }
    size_t novel = 0;
    bool reached = config.vocab_target_size <= base.size();
    if (!reached) {
      auto ext = extend_with_bpe(base, texts, config.vocab_target_size);
      novel = ext.novel_tokens;
      reached = ext.reached_target;
      vocab.emplace(std::move(ext.vocab));
      if (!reached) {
        spdlog::warn("vocab: texts exhausted at {} tokens (target {})", vocab->size(),
                     config.vocab_target_size);
      }
    } else {
      vocab.emplace(std::move(base));
    }
    out.write("vocab.json", vocab->to_json());
    out.summary({{"base_size", to_s(vocab->base_size())},
                 {"size", to_s(vocab->size())},
                 {"novel_tokens", to_s(novel)},
                 {"reached_target", reached ? "true" : "false"}});
  });

  std::vector<PairBucket> buckets;
  run_stage("pack", out_dir, manifest, [&](StageOutputs& out) {
    const auto pack_config = PackConfig::after_vocabulary(*vocab, config.pack_length);
    const auto packed = pack_corpora(balanced, *vocab, pack_config);
    for (const auto& p : packed) {
      out.path("packed/" + p.direction.str() + ".bin");
      out.path("packed/" + p.direction.str() + ".json");
    }
    write_packed(out_dir, packed, pack_config);
    out.write("packed_stats.json", packed_stats_to_json(packed, config.pack_length));
    buckets = buckets_from_packed(packed);
    uint64_t total = 0;
    for (const auto& b : buckets) total += b.total_samples;
    out.summary({{"samples", to_s(total)}});
  });

  std::vector<Interval> intervals;
  run_stage("partition", out_dir, manifest, [&](StageOutputs& out) {
    auto part = partition_intervals(buckets, {config.s_high, config.s_low, config.cutover});
    intervals = interval_means(std::move(part.intervals));
    out.write("intervals.json", intervals_to_json(intervals, part.excluded));
    out.summary({{"intervals", to_s(intervals.size())}, {"excluded", to_s(part.excluded.size())}});
  });

  run_stage("schedule", out_dir, manifest, [&](StageOutputs& out) {
    std::ofstream trace(out.path("schedule.jsonl"), std::ios::binary);
    Scheduler scheduler(intervals, config.batch_size, stage_seed(root_seed, "schedule"));
    uint64_t batches = 0;
    uint64_t merges = 0;
    while (auto ev = scheduler.next()) {
      trace << to_json_line(*ev) << '\n';
      batches += ev->kind == EventKind::kBatch;
      merges += ev->kind == EventKind::kMerge;
    }
    if (!trace) throw DataError("cannot write schedule trace");
    out.summary({{"batches", to_s(batches)}, {"merges", to_s(merges)}});
  });

  run_stage("instruct", out_dir, manifest, [&](StageOutputs& out) {
    const auto records = build_instruction_dataset(balanced, config.per_direction,
                                                   stage_seed(root_seed, "instruct"));
    std::ofstream file(out.path("instruct.jsonl"), std::ios::binary);
    write_instructions(file, records);
    if (!file) throw DataError("cannot write instruction dataset");
    out.summary({{"records", to_s(records.size())}});
  });

  std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
  mf << manifest_to_json(manifest);
  if (!mf) throw DataError("cannot write manifest");
  return manifest;
}

std::string manifest_to_json(const RunManifest& m) {
  using ojson = nlohmann::ordered_json;
  ojson j;
  j["tool_version"] = m.tool_version;
  auto& cfg = j["config"] = ojson::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  auto& inputs = j["inputs"] = ojson::array();
  for (const auto& f : m.inputs) {
    inputs.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  auto& artifacts = j["artifacts"] = ojson::array();
  for (const auto& a : m.artifacts) {
    artifacts.push_back(
        {{"stage", a.stage}, {"path", a.file.path}, {"sha256", a.file.sha256}, {"bytes", a.file.bytes}});
  }
  auto& stages = j["stages"] = ojson::object();
  for (const auto& s : m.stages) {
    auto& entry = stages[s.stage] = ojson::object();
    for (const auto& [k, v] : s.values) entry[k] = v;
  }
  j["training"] = {
      {"executed", false},
      {"pretrain",
       {{"learning_rate", 5e-5}, {"lr_scheduler", "cosine"}, {"warmup_ratio", 0.03}, {"batch_size", 65536}}},
      {"finetune",
       {{"batch_size", 32}, {"epochs", 3}, {"learning_rate", 2e-5}, {"weight_decay", 0.0}}},
      {"inference", {{"decoding", "beam_search"}, {"beam_size", 5}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace mtdata
