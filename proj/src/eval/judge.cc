#include "mtdata/eval/judge.h"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <thread>

#include "mtdata/error.h"
#include "mtdata/eval/rubric.h"
#include "mtdata/parallel.h"

namespace mtdata::eval {
namespace {

constexpr std::string_view kSystemMessage =
    "Score each sample separately. Reply with one score per sample, in sample order, "
    "separated by commas.";

std::string request_body(const JudgeConfig& config, const std::string& prompt) {
  nlohmann::ordered_json j;
  j["model"] = config.model;
  j["temperature"] = 0;
  j["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", kSystemMessage}}, {{"role", "user"}, {"content", prompt}}});
  return j.dump();
}

std::string reply_content(const std::string& body) {
  const auto j = nlohmann::json::parse(body);
  return j.at("choices").at(0).at("message").at("content").get<std::string>();
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

struct Batch {
  std::vector<size_t> items;
};

}  // namespace

JudgeResult judge(std::span<const EvalItem> items, ChatTransport& transport,
                  const JudgeConfig& config, Sleeper sleep) {
  if (config.batch_size == 0 || config.batch_size > kMaxRubricSamples) {
    throw UsageError("judge batch size must be 1-" + std::to_string(kMaxRubricSamples));
  }
  if (!sleep) sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  std::vector<std::string> order;
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < items.size(); ++i) {
    auto key = items[i].direction.str();
    auto& g = groups[key];
    if (g.empty()) order.push_back(key);
    g.push_back(i);
  }
  std::vector<Batch> batches;
  for (const auto& key : order) {
    const auto& g = groups[key];
    for (size_t at = 0; at < g.size(); at += config.batch_size) {
      const size_t end = std::min(g.size(), at + config.batch_size);
      batches.push_back({std::vector<size_t>(g.begin() + at, g.begin() + end)});
    }
  }

  JudgeResult result;
  result.scores.resize(items.size());
  result.batches.resize(batches.size());
  std::vector<char> answered(batches.size(), 0);

  parallel_for(
      batches.size(),
      [&](size_t b) {
        const auto& batch = batches[b];
        auto& log = result.batches[b];
        log.direction = items[batch.items.front()].direction.str();
        log.first_item = batch.items.front();
        log.size = batch.items.size();

        std::vector<RubricSample> samples;
        for (size_t i : batch.items) samples.push_back({items[i].hypothesis, items[i].reference});
        const auto body = request_body(config, build_rubric_prompt(samples));

        auto delay = config.initial_backoff;
        for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
          if (attempt > 0) {
            sleep(delay);
            delay = std::min(delay * 2, config.max_backoff);
          }
          ++log.attempts;
          const auto resp = transport.post(body);
          if (resp.status != 0) answered[b] = 1;
          if (resp.status == 401 || resp.status == 403) {
            throw AuthError("judge endpoint rejected the credential (HTTP " +
                            std::to_string(resp.status) + ")");
          }
          if (resp.status != 200) {
            log.error = resp.status == 0 ? resp.error : "HTTP " + std::to_string(resp.status);
            if (!retryable(resp.status)) break;
            continue;
          }
          try {
            const auto content = reply_content(resp.body);
            auto parsed = parse_scores(content, batch.items.size());
            for (size_t k = 0; k < batch.items.size(); ++k) {
              result.scores[batch.items[k]] =
                  RubricScore{parsed.values[k], config.model, content, parsed.overall_mode};
            }
            log.scored = true;
            log.overall_mode = parsed.overall_mode;
            log.error.clear();
            if (parsed.overall_mode && batch.items.size() > 1) {
              spdlog::warn("judge batch {} ({}): single overall score replicated to {} samples",
                           b, log.direction, batch.items.size());
            }
            return;
          } catch (const std::exception& e) {
            log.error = e.what();
          }
        }
        spdlog::warn("judge batch {} ({}) left unscored after {} attempts: {}", b, log.direction,
                     log.attempts, log.error);
      },
      config.parallelism);

  if (!batches.empty() && std::none_of(answered.begin(), answered.end(), [](char a) { return a != 0; })) {
    throw RemoteError("judge endpoint unreachable: " + result.batches.front().error);
  }
  return result;
}

Aggregate aggregate(std::span<const std::optional<double>> scores) {
  Aggregate a;
  std::vector<double> present;
  for (const auto& s : scores) {
    if (s) {
      present.push_back(*s);
    } else {
      ++a.missing;
    }
  }
  if (present.empty()) throw DataError("aggregate: every score is missing");
  // Summing in sorted order makes the mean independent of input order.
  std::sort(present.begin(), present.end());
  double sum = 0.0;
  for (double v : present) sum += v;
  a.present = present.size();
  a.mean = sum / static_cast<double>(a.present);
  return a;
}

std::string score_to_json_line(const EvalItem& item, size_t index,
                               const std::optional<RubricScore>& score) {
  nlohmann::ordered_json j;
  j["direction"] = item.direction.str();
  j["index"] = index;
  if (score) {
    j["score"] = score->value;
    j["overall_mode"] = score->overall_mode;
    j["judge"] = score->judge_model;
    j["raw"] = score->raw_response;
  } else {
    j["score"] = nullptr;
  }
  return j.dump();
}

}  // namespace mtdata::eval
