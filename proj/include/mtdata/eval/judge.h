#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtdata/eval/types.h"

namespace mtdata::eval {

struct JudgeConfig {
  std::string endpoint;  // chat-completion URL
  std::string model = "gpt-4";
  std::string api_key_env = "OPENAI_API_KEY";  // empty: send no credential
  std::chrono::seconds timeout{60};
  int max_retries = 4;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{16'000};
  size_t parallelism = 4;
  size_t batch_size = 5;
};

struct HttpResponse {
  int status = 0;  // 0: no response (connection or timeout failure)
  std::string body;
  std::string error;
};

// Sends one chat-completion request body.  Implementations must be safe to
// call from several threads at once.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual HttpResponse post(const std::string& json_body) = 0;
};

// HTTP(S) transport.  Reads the bearer credential from the environment
// variable named in the config; throws AuthError if it is named but unset.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(const JudgeConfig& config);
  HttpResponse post(const std::string& json_body) override;

 private:
  std::string base_;  // scheme://host[:port]
  std::string path_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

struct RubricScore {
  double value = 0.0;  // in [0, 5]
  std::string judge_model;
  std::string raw_response;
  bool overall_mode = false;
};

struct BatchLog {
  std::string direction;
  size_t first_item = 0;  // index into the judged items
  size_t size = 0;
  int attempts = 0;
  bool scored = false;
  bool overall_mode = false;
  std::string error;
};

struct JudgeResult {
  std::vector<std::optional<RubricScore>> scores;  // parallel to the input items
  std::vector<BatchLog> batches;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Groups items by direction (first appearance order), cuts each group into
// batches of config.batch_size, and scores each batch with one rubric
// prompt.  Failed calls (no response, 429, 5xx, unparseable reply) are
// retried with exponential backoff up to max_retries; a batch that still
// fails is left missing.  Up to config.parallelism batches run at once;
// results do not depend on completion order.
//
// Throws AuthError on 401/403, and RemoteError when every batch failed
// without the endpoint ever answering.
JudgeResult judge(std::span<const EvalItem> items, ChatTransport& transport,
                  const JudgeConfig& config, Sleeper sleep = {});

struct Aggregate {
  double mean = 0.0;
  size_t present = 0;
  size_t missing = 0;
};

// Mean over present scores.  Throws DataError if none is present.
Aggregate aggregate(std::span<const std::optional<double>> scores);

std::string score_to_json_line(const EvalItem& item, size_t index,
                               const std::optional<RubricScore>& score);

}  // namespace mtdata::eval
