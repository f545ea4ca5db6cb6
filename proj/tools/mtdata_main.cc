#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>

#include "mtdata/config.h"
#include "mtdata/corpus.h"
#include "mtdata/error.h"
#include "mtdata/eval/bleu.h"
#include "mtdata/eval/flores.h"
#include "mtdata/eval/judge.h"
#include "mtdata/eval/report.h"
#include "mtdata/instruct.h"
#include "mtdata/packing.h"
#include "mtdata/pipeline.h"
#include "mtdata/scheduler.h"
#include "mtdata/vocab.h"

namespace fs = std::filesystem;
using namespace mtdata;

namespace {

// Flags that mirror PipelineConfig keys.  Values stay strings until the
// config file and flags are merged by resolve_config.
class ConfigFlags {
 public:
  struct Key {
    std::string key;
    std::string names;  // CLI11 option names; derived from the key if empty
    std::string help;
  };

  void add(CLI::App* app, std::initializer_list<Key> keys) {
    app->add_option("--config", config_file_, "YAML file of config keys; flags override it")
        ->check(CLI::ExistingFile);
    for (const auto& k : keys) {
      auto names = k.names;
      if (names.empty()) {
        names = "--" + k.key;
        std::replace(names.begin(), names.end(), '_', '-');
      }
      auto* opt = app->add_option(names, values_[k.key], k.help);
      options_.emplace_back(k.key, opt);
    }
  }

  PipelineConfig resolve() const {
    std::map<std::string, std::string> file_values;
    if (!config_file_.empty()) file_values = read_config_file(config_file_);
    std::map<std::string, std::string> flag_values;
    for (const auto& [key, opt] : options_) {
      if (opt->count() > 0) flag_values[key] = values_.at(key);
    }
    return resolve_config(file_values, flag_values);
  }

 private:
  std::string config_file_;
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
};

uint64_t require_seed(const PipelineConfig& config) {
  if (!config.seed) throw UsageError("--seed is required (no implicit randomness)");
  return *config.seed;
}

fs::path require_path(const fs::path& p, std::string_view flag) {
  if (p.empty()) throw UsageError(std::string(flag) + " is required");
  return p;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw DataError("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes to `path`, or stdout when it is empty.
void emit(const fs::path& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    write_file(path, content);
  }
}

Vocabulary load_vocab(const fs::path& path) { return Vocabulary::from_json(read_file(path)); }

// Hypothesis files are "{src}-{tgt}.txt", one sentence per line, aligned with
// the first lines of the reference language files.
std::vector<eval::EvalItem> load_eval_items(const fs::path& refs, const fs::path& hyps,
                                            size_t per_direction) {
  std::vector<Direction> directions;
  std::map<std::string, std::vector<std::string>> hypotheses;
  if (!fs::is_directory(hyps)) throw DataError("hypothesis directory " + hyps.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(hyps)) {
    if (entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto dir = Direction::parse(f.stem().string());
    hypotheses[dir.str()] = eval::read_lines(f);
    directions.push_back(dir);
  }
  if (directions.empty()) throw DataError("no {src}-{tgt}.txt hypothesis files in " + hyps.string());

  auto subset = eval::load_flores_subset(refs, directions, per_direction);
  for (const auto& [dir, missing] : subset.shortfall) {
    spdlog::warn("{}: {} reference sentences short of {}", dir, missing, per_direction);
  }
  std::map<std::string, size_t> next;
  for (auto& item : subset.items) {
    const auto key = item.direction.str();
    const auto& lines = hypotheses.at(key);
    const size_t i = next[key]++;
    if (i >= lines.size()) {
      throw DataError(key + ": hypothesis file has " + std::to_string(lines.size()) +
                      " lines, fewer than the references");
    }
    item.hypothesis = lines[i];
  }
  return std::move(subset.items);
}

std::string score_table(const std::string& system,
                        const std::map<std::string, eval::DirectionScore>& scores) {
  eval::SystemReport report{system, scores};
  return eval::score_table_to_tsv(std::span(&report, 1));
}

int run_app(int argc, char** argv) {
  CLI::App app{"Multilingual translation data preparation and evaluation"};
  app.set_version_flag("--version", MTDATA_VERSION);
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // balance
  auto* balance = app.add_subcommand("balance", "Add reverse directions to a corpus directory");
  ConfigFlags balance_flags;
  balance_flags.add(balance, {{"corpus_dir", "--input,--corpus-dir", "Corpus directory"},
                              {"flip_threshold", "", "Corpora smaller than this flip whole"},
                              {"seed", "", "Root seed"}});
  fs::path balance_out;
  fs::path balance_stats;
  balance->add_option("--out", balance_out, "Output corpus directory")->required();
  balance->add_option("--stats", balance_stats, "Stats JSON (default OUT/corpus_stats.json)");

  // vocab
  auto* vocab = app.add_subcommand("vocab", "Vocabulary tools");
  vocab->require_subcommand(1);
  auto* vocab_train = vocab->add_subcommand("train", "Extend a vocabulary with BPE merges");
  ConfigFlags vocab_flags;
  vocab_flags.add(vocab_train, {{"corpus_dir", "--input,--corpus-dir", "Corpus directory"},
                                {"max_num", "", "Sentences sampled per language"},
                                {"vocab_target_size", "--target-size,--vocab-target-size",
                                 "Vocabulary size to reach"},
                                {"base_vocab", "--base,--base-vocab", "Base vocabulary JSON"},
                                {"seed", "", "Root seed"}});
  fs::path vocab_out;
  vocab_train->add_option("--out", vocab_out, "Output vocabulary JSON")->required();
  auto* vocab_base = vocab->add_subcommand("base", "Write a base vocabulary");
  size_t base_size = 256;
  fs::path base_out;
  vocab_base->add_option("--size", base_size,
                         "Token count; 256 is the byte alphabet, larger sizes add "
                         "synthetic multi-byte tokens")
      ->check(CLI::Range(size_t{256}, size_t{1} << 24));
  vocab_base->add_option("--out", base_out, "Output vocabulary JSON")->required();

  // pack
  auto* pack_cmd = app.add_subcommand("pack", "Pack sentence pairs into fixed-length samples");
  ConfigFlags pack_flags;
  pack_flags.add(pack_cmd, {{"corpus_dir", "--input,--corpus-dir", "Corpus directory"},
                            {"pack_length", "", "Tokens per sample"}});
  fs::path pack_vocab;
  fs::path pack_out;
  pack_cmd->add_option("--vocab", pack_vocab, "Vocabulary JSON")->required()->check(CLI::ExistingFile);
  pack_cmd->add_option("--out", pack_out, "Output directory")->required();

  // schedule
  auto* sched = app.add_subcommand("schedule", "Interval curriculum scheduling");
  sched->require_subcommand(1);
  auto* sched_run = sched->add_subcommand("run", "Write the batch schedule trace");
  ConfigFlags sched_flags;
  sched_flags.add(sched_run, {{"s_high", "", "Interval width at or above the cutover"},
                              {"s_low", "", "Interval width below the cutover"},
                              {"cutover", "", "Sample count where the wide intervals start"},
                              {"batch_size", "", "Samples per batch"},
                              {"seed", "", "Root seed"}});
  fs::path sched_buckets;
  fs::path sched_trace;
  fs::path sched_intervals;
  sched_run->add_option("--buckets", sched_buckets, "Bucket totals JSON (e.g. packed_stats.json)")
      ->required()
      ->check(CLI::ExistingFile);
  sched_run->add_option("--trace", sched_trace, "Output JSONL (default stdout)");
  sched_run->add_option("--intervals", sched_intervals, "Also write the interval partition JSON");
  auto* sched_sim = sched->add_subcommand("simulate", "Per-direction exposure from a trace");
  fs::path sim_trace;
  fs::path sim_out;
  sched_sim->add_option("--trace", sim_trace, "Schedule trace JSONL")->required()->check(CLI::ExistingFile);
  sched_sim->add_option("--out", sim_out, "Output TSV (default stdout)");

  // instruct
  auto* instruct = app.add_subcommand("instruct", "Instruction-tuning data");
  instruct->require_subcommand(1);
  auto* instruct_build = instruct->add_subcommand("build", "Build the instruction dataset");
  ConfigFlags instruct_flags;
  instruct_flags.add(instruct_build, {{"corpus_dir", "--input,--corpus-dir", "Corpus directory"},
                                      {"per_direction", "", "Pairs selected per direction"},
                                      {"seed", "", "Root seed"}});
  fs::path instruct_out;
  fs::path instruct_templates;
  instruct_build->add_option("--out", instruct_out, "Output JSONL (default stdout)");
  instruct_build->add_option("--templates", instruct_templates, "Template registry JSON")
      ->check(CLI::ExistingFile);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Translation evaluation");
  eval_cmd->require_subcommand(1);
  fs::path eval_refs;
  fs::path eval_hyps;
  size_t eval_per_direction = eval::kDefaultFloresPerDirection;
  std::string eval_system = "system";
  fs::path eval_out;
  auto add_eval_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--refs", eval_refs, "Reference directory ({code}.devtest per language)")
        ->required();
    cmd->add_option("--hyps", eval_hyps, "Hypothesis directory ({src}-{tgt}.txt)")->required();
    cmd->add_option("--per-direction", eval_per_direction, "Sentences per direction")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--system", eval_system, "System name for the score table");
    cmd->add_option("--out", eval_out, "Score table TSV (default stdout)");
  };
  auto* eval_bleu = eval_cmd->add_subcommand("bleu", "Corpus BLEU per direction");
  add_eval_inputs(eval_bleu);
  auto* eval_judge = eval_cmd->add_subcommand("judge", "Rubric scores from an LLM judge");
  add_eval_inputs(eval_judge);
  ConfigFlags judge_flags;
  judge_flags.add(eval_judge, {{"judge_endpoint", "", "Chat-completion URL"},
                               {"judge_model", "", "Judge model name"},
                               {"judge_api_key_env", "", "Env var holding the credential"},
                               {"judge_timeout_s", "", "Request timeout in seconds"},
                               {"judge_max_retries", "", "Retries per batch"},
                               {"judge_parallelism", "", "Concurrent requests"}});
  fs::path judge_scores;
  eval_judge->add_option("--scores", judge_scores, "Per-sentence scores JSONL");
  auto* eval_report = eval_cmd->add_subcommand("report", "Compare systems on score tables");
  std::vector<fs::path> report_fixtures;
  std::string report_sort_by;
  fs::path report_out;
  fs::path report_series;
  fs::path report_wins;
  eval_report->add_option("--fixtures", report_fixtures, "Score table TSV files")
      ->required()
      ->check(CLI::ExistingFile);
  eval_report->add_option("--sort-by", report_sort_by, "System whose scores order the rows")
      ->required();
  eval_report->add_option("--out", report_out, "Report TSV (default stdout)");
  eval_report->add_option("--series", report_series, "per-system score series JSON for plotting");
  eval_report->add_option("--wins", report_wins, "Pairwise win sets TSV");

  // run
  auto* run = app.add_subcommand("run", "Run every data stage and write a manifest");
  ConfigFlags run_flags;
  run_flags.add(run, {{"corpus_dir", "--input,--corpus-dir", "Corpus directory"},
                      {"base_vocab", "--base,--base-vocab", "Base vocabulary JSON"},
                      {"output_dir", "--out,--output-dir", "Output directory"},
                      {"flip_threshold", "", ""},
                      {"max_num", "", ""},
                      {"vocab_target_size", "--target-size,--vocab-target-size", ""},
                      {"pack_length", "", ""},
                      {"s_high", "", ""},
                      {"s_low", "", ""},
                      {"cutover", "", ""},
                      {"batch_size", "", ""},
                      {"per_direction", "", ""},
                      {"seed", "", "Root seed"}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  if (balance->parsed()) {
    auto config = balance_flags.resolve();
    const auto seed = require_seed(config);
    auto loaded = load_corpus_dir(require_path(config.corpus_dir, "--input"));
    auto balanced =
        balance_directions(loaded.corpora, config.flip_threshold, stage_seed(seed, "balance"));
    write_corpus_dir(balance_out, balanced);
    const auto stats = compute_stats(balanced, loaded.skipped);
    write_file(balance_stats.empty() ? balance_out / "corpus_stats.json" : balance_stats,
               stats_to_json(stats));
    spdlog::info("balance: {} directions in, {} out, {} pairs", loaded.corpora.size(),
                 balanced.size(), stats.total_pairs);
  } else if (vocab_train->parsed()) {
    auto config = vocab_flags.resolve();
    const auto seed = require_seed(config);
    const auto corpora = load_corpus_dir(require_path(config.corpus_dir, "--input")).corpora;
    const auto base =
        config.base_vocab.empty() ? Vocabulary::byte_level() : load_vocab(config.base_vocab);
    const auto samples = sample_for_vocab(corpora, config.max_num, stage_seed(seed, "vocab"));
    std::vector<std::string> texts;
    for (const auto& [lang, sentences] : samples) texts.insert(texts.end(), sentences.begin(), sentences.end());
    auto ext = extend_with_bpe(base, texts, config.vocab_target_size);
    write_file(vocab_out, ext.vocab.to_json());
    spdlog::info("vocab: {} -> {} tokens ({} novel, {} merges trained)", base.size(), ext.vocab.size(),
                 ext.novel_tokens, ext.merges_trained);
    if (!ext.reached_target) {
      spdlog::warn("vocab: texts exhausted before reaching {} tokens", config.vocab_target_size);
    }
  } else if (vocab_base->parsed()) {
    const auto v = base_size == 256 ? Vocabulary::byte_level() : Vocabulary::synthetic_base(base_size);
    write_file(base_out, v.to_json());
  } else if (pack_cmd->parsed()) {
    auto config = pack_flags.resolve();
    const auto corpora = load_corpus_dir(require_path(config.corpus_dir, "--input")).corpora;
    const auto v = load_vocab(pack_vocab);
    const auto pack_config = PackConfig::after_vocabulary(v, config.pack_length);
    const auto packed = pack_corpora(corpora, v, pack_config);
    write_packed(pack_out, packed, pack_config);
    write_file(pack_out / "packed_stats.json", packed_stats_to_json(packed, config.pack_length));
  } else if (sched_run->parsed()) {
    auto config = sched_flags.resolve();
    const auto seed = require_seed(config);
    const auto buckets = load_buckets(sched_buckets);
    auto part = partition_intervals(buckets, {config.s_high, config.s_low, config.cutover});
    for (const auto& d : part.excluded) spdlog::warn("schedule: {} has no samples; excluded", d.str());
    auto intervals = interval_means(std::move(part.intervals));
    if (!sched_intervals.empty()) write_file(sched_intervals, intervals_to_json(intervals, part.excluded));
    std::ofstream file;
    if (!sched_trace.empty()) {
      if (sched_trace.has_parent_path()) fs::create_directories(sched_trace.parent_path());
      file.open(sched_trace, std::ios::binary);
      if (!file) throw DataError("cannot write " + sched_trace.string());
    }
    std::ostream& out = sched_trace.empty() ? std::cout : file;
    Scheduler scheduler(std::move(intervals), config.batch_size, stage_seed(seed, "schedule"));
    while (auto ev = scheduler.next()) out << to_json_line(*ev) << '\n';
    if (!out) throw DataError("cannot write schedule trace");
  } else if (sched_sim->parsed()) {
    std::ifstream in(sim_trace, std::ios::binary);
    const auto events = read_trace(in);
    emit(sim_out, exposure_to_tsv(simulate_exposure(events)));
  } else if (instruct_build->parsed()) {
    auto config = instruct_flags.resolve();
    const auto seed = require_seed(config);
    const auto corpora = load_corpus_dir(require_path(config.corpus_dir, "--input")).corpora;
    std::optional<TemplateRegistry> custom;
    if (!instruct_templates.empty()) custom = TemplateRegistry::from_json(read_file(instruct_templates));
    const auto records =
        build_instruction_dataset(corpora, config.per_direction, stage_seed(seed, "instruct"),
                                  custom ? *custom : TemplateRegistry::builtin());
    std::ostringstream out;
    write_instructions(out, records);
    emit(instruct_out, out.str());
  } else if (eval_bleu->parsed()) {
    const auto items = load_eval_items(eval_refs, eval_hyps, eval_per_direction);
    std::map<std::string, std::vector<eval::EvalItem>> by_direction;
    for (const auto& item : items) by_direction[item.direction.str()].push_back(item);
    std::map<std::string, eval::DirectionScore> scores;
    for (const auto& [dir, group] : by_direction) {
      scores[dir] = {eval::corpus_bleu(group), group.size(), 0};
    }
    emit(eval_out, score_table(eval_system, scores));
  } else if (eval_judge->parsed()) {
    auto config = judge_flags.resolve();
    if (config.judge_endpoint.empty()) throw UsageError("--judge-endpoint is required");
    const auto judge_config = config.judge_config();
    const auto items = load_eval_items(eval_refs, eval_hyps, eval_per_direction);
    eval::HttpChatTransport transport(judge_config);
    const auto result = eval::judge(items, transport, judge_config);
    if (!judge_scores.empty()) {
      std::string lines;
      for (size_t i = 0; i < items.size(); ++i) {
        lines += eval::score_to_json_line(items[i], i, result.scores[i]) + "\n";
      }
      write_file(judge_scores, lines);
    }
    std::map<std::string, std::vector<std::optional<double>>> by_direction;
    for (size_t i = 0; i < items.size(); ++i) {
      const auto& s = result.scores[i];
      by_direction[items[i].direction.str()].push_back(s ? std::optional(s->value) : std::nullopt);
    }
    std::map<std::string, eval::DirectionScore> scores;
    for (const auto& [dir, values] : by_direction) {
      try {
        const auto agg = eval::aggregate(values);
        scores[dir] = {agg.mean, agg.present, agg.missing};
        if (agg.missing > 0) spdlog::warn("{}: {} sentences unscored", dir, agg.missing);
      } catch (const DataError&) {
        spdlog::warn("{}: no scores returned; direction left out", dir);
      }
    }
    if (scores.empty()) throw RemoteError("the judge returned no usable scores");
    emit(eval_out, score_table(eval_system, scores));
  } else if (eval_report->parsed()) {
    std::vector<eval::SystemReport> systems;
    for (const auto& path : report_fixtures) {
      for (auto& r : eval::load_score_table(path)) {
        auto same = std::find_if(systems.begin(), systems.end(),
                                 [&](const auto& s) { return s.system == r.system; });
        if (same == systems.end()) {
          systems.push_back(std::move(r));
        } else {
          same->scores.merge(r.scores);
        }
      }
    }
    const auto report = eval::comparison_report(systems, report_sort_by);
    for (const auto& [system, dropped] : report.omitted) {
      spdlog::warn("{}: {} directions without scores from every system left out", system, dropped.size());
    }
    emit(report_out, eval::report_to_tsv(report));
    if (!report_series.empty()) write_file(report_series, eval::series_to_json(report));
    if (!report_wins.empty()) write_file(report_wins, eval::wins_to_tsv(report));
  } else if (run->parsed()) {
    auto config = run_flags.resolve();
    require_seed(config);
    require_path(config.corpus_dir, "--input");
    require_path(config.output_dir, "--out");
    const auto manifest = run_pipeline(config);
    for (const auto& s : manifest.stages) {
      std::string line;
      for (const auto& [k, v] : s.values) line += " " + k + "=" + v;
      spdlog::info("{}:{}", s.stage, line);
    }
    spdlog::info("wrote {} artifacts and manifest.json to {}", manifest.artifacts.size(),
                 config.output_dir.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("mtdata"));
  spdlog::set_pattern("%^%l%$: %v");
  try {
    return run_app(argc, argv);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const RemoteError& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
}
