#pragma once
// HTTP client for the inference sidecar.
//
//   POST /nli    {"pairs": [{"premise": s, "hypothesis": s}]}
//             -> {"results": [{"entailment": f, "contradiction": f, "neutral": f}]}
//   POST /embed  {"texts": [s]} -> {"vectors": [[f]]}
//   GET  /info   -> {"nli_model": s, "embed_model": s, "embed_dim": int}
//   GET  /health -> 200
//
// Failures are reported with status >= 400 and {"error": string}.

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

// Eigen must precede httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include "factcheck/embedding.hpp"
#include "factcheck/nli.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace factcheck {

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{100};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{60000};
};

class SidecarClient {
 public:
  explicit SidecarClient(std::string endpoint, RetryPolicy retry = {})
      : endpoint_(std::move(endpoint)), retry_(retry) {}

  const std::string& endpoint() const { return endpoint_; }

  /// Transport failures are retried with exponential backoff; HTTP error
  /// statuses and malformed bodies are not.
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const {
    const std::string payload = body.dump();
    return request(path, [&](httplib::Client& cli) {
      return cli.Post(path, payload, "application/json");
    });
  }

  nlohmann::json get(const std::string& path) const {
    return request(path, [&](httplib::Client& cli) { return cli.Get(path); });
  }

  bool healthy() const {
    httplib::Client cli = make_client();
    auto res = cli.Get("/health");
    return res && res->status == 200;
  }

 private:
  httplib::Client make_client() const {
    httplib::Client cli(endpoint_);
    const auto ct = retry_.connect_timeout.count();
    const auto rt = retry_.read_timeout.count();
    cli.set_connection_timeout(ct / 1000, (ct % 1000) * 1000);
    cli.set_read_timeout(rt / 1000, (rt % 1000) * 1000);
    return cli;
  }

  template <typename Send>
  nlohmann::json request(const std::string& path, Send send) const {
    auto backoff = retry_.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(backoff.count()) * retry_.backoff_multiplier));
      }
      httplib::Client cli = make_client();
      auto res = send(cli);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception&) {
        throw ProtocolError(path + ": response is not JSON (status " + std::to_string(res->status) + ")");
      }
      if (res->status >= 400) {
        std::string msg = body.is_object() && body.contains("error") && body["error"].is_string()
                              ? body["error"].get<std::string>()
                              : std::string("no error message");
        throw ProtocolError(path + ": status " + std::to_string(res->status) + ": " + msg);
      }
      if (res->status != 200) {
        throw ProtocolError(path + ": unexpected status " + std::to_string(res->status));
      }
      return body;
    }
    throw TransportError(endpoint_ + path + ": " + last_error + " after " +
                         std::to_string(retry_.max_retries) + " retries");
  }

  std::string endpoint_;
  RetryPolicy retry_;
};

namespace detail {

inline double protocol_number(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_number()) {
    throw ProtocolError(std::string("missing numeric field '") + key + "'");
  }
  return obj[key].get<double>();
}

}  // namespace detail

/// Order-preserving batch classification. An empty batch makes no request.
inline std::vector<NliDistribution> remote_classify(std::span<const NliRequest> batch,
                                                    const SidecarClient& client) {
  if (batch.empty()) return {};
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& r : batch) pairs.push_back({{"premise", r.premise}, {"hypothesis", r.hypothesis}});
  const nlohmann::json body = client.post("/nli", {{"pairs", std::move(pairs)}});
  if (!body.is_object() || !body.contains("results") || !body["results"].is_array()) {
    throw ProtocolError("/nli: missing 'results' array");
  }
  const auto& results = body["results"];
  if (results.size() != batch.size()) {
    throw ProtocolError("/nli: expected " + std::to_string(batch.size()) + " results, got " +
                        std::to_string(results.size()));
  }
  std::vector<NliDistribution> out;
  out.reserve(batch.size());
  for (const auto& r : results) {
    NliDistribution d{detail::protocol_number(r, "entailment"),
                      detail::protocol_number(r, "contradiction"),
                      detail::protocol_number(r, "neutral")};
    if (!d.valid()) throw ProtocolError("/nli: result is not a probability distribution");
    out.push_back(d);
  }
  return out;
}

inline std::vector<NliDistribution> remote_classify(std::span<const NliRequest> batch,
                                                    const std::string& endpoint,
                                                    const RetryPolicy& retry = {}) {
  return remote_classify(batch, SidecarClient(endpoint, retry));
}

class RemoteScorer final : public NliScorer {
 public:
  explicit RemoteScorer(std::string endpoint, RetryPolicy retry = {})
      : client_(std::move(endpoint), retry) {}

  std::vector<NliDistribution> classify(std::span<const NliRequest> batch) const override {
    return remote_classify(batch, client_);
  }
  std::string name() const override { return "remote:" + client_.endpoint(); }

 private:
  SidecarClient client_;
};

struct SidecarInfo {
  std::string nli_model;
  std::string embed_model;
  std::size_t embed_dim = 0;
};

inline SidecarInfo fetch_sidecar_info(const SidecarClient& client) {
  const auto j = client.get("/info");
  SidecarInfo info;
  try {
    info.nli_model = j.at("nli_model").get<std::string>();
    info.embed_model = j.at("embed_model").get<std::string>();
    info.embed_dim = j.at("embed_dim").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("/info: ") + e.what());
  }
  if (info.embed_dim == 0) throw ProtocolError("/info: embed_dim must be positive");
  return info;
}

/// Embeddings served by the sidecar. The dimension is read from /info once.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(std::string endpoint, RetryPolicy retry = {})
      : client_(std::move(endpoint), retry), info_(fetch_sidecar_info(client_)) {}

  std::size_t dim() const override { return info_.embed_dim; }
  std::string id() const override { return "sidecar:" + info_.embed_model; }

  Eigen::VectorXd embed(std::string_view text) const override {
    const std::string s(text);
    return embed_batch(std::span(&s, 1)).front();
  }

  std::vector<Eigen::VectorXd> embed_batch(std::span<const std::string> texts) const override {
    if (texts.empty()) return {};
    const nlohmann::json body = client_.post("/embed", {{"texts", std::vector<std::string>(texts.begin(), texts.end())}});
    if (!body.is_object() || !body.contains("vectors") || !body["vectors"].is_array()) {
      throw ProtocolError("/embed: missing 'vectors' array");
    }
    const auto& vectors = body["vectors"];
    if (vectors.size() != texts.size()) throw ProtocolError("/embed: vector count mismatch");
    std::vector<Eigen::VectorXd> out;
    out.reserve(texts.size());
    for (const auto& v : vectors) {
      if (!v.is_array()) throw ProtocolError("/embed: vector is not an array");
      if (v.size() != info_.embed_dim) throw DimensionMismatch(info_.embed_dim, v.size());
      Eigen::VectorXd e(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ProtocolError("/embed: non-numeric component");
        e[static_cast<Eigen::Index>(i)] = v[i].get<double>();
      }
      out.push_back(std::move(e));
    }
    return out;
  }

 private:
  SidecarClient client_;
  SidecarInfo info_;
};

}  // namespace factcheck
