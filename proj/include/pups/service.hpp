#pragma once

// HTTP + JSON front end of a Session.
//
//   GET  /state                 run status and counters (no solutions)
//   GET  /solutions?history=b   archive, or every evaluated point when history=true
//   GET  /grouped?ranges=<json>&history=b
//                               solutions grouped by number of violated limits
//   POST /ranges {lower, upper} 200, or 422 for malformed/invalid ranges
//   POST /start, POST /stop     200 (start answers 409 when the budget is exhausted)
//   POST /budget {evals}        200, or 422
//   GET  /events                server-sent events, one per published snapshot
//
// Infinite range bounds travel as the strings "inf" / "-inf".

#include <atomic>
#include <chrono>
#include <httplib.h>
#include <string>

#include "pups/json_io.hpp"
#include "pups/preference.hpp"
#include "pups/session.hpp"

namespace pups {

inline Json snapshot_state_json(const RunSnapshot& s) {
  return {{"version", s.version},
          {"status", to_string(s.status)},
          {"eval_count", s.eval_count},
          {"budget", s.budget},
          {"evals_left", s.evals_left},
          {"avg_eval_time", s.avg_eval_time},
          {"estimated_time_left", s.estimated_time_left},
          {"elapsed_total", s.elapsed_total},
          {"archive_size", s.archive->size()},
          {"ranges", ranges_to_json(s.ranges)},
          {"awaiting_preferences", s.awaiting_preferences},
          {"last_error", s.last_error}};
}

class Service {
public:
  explicit Service(Session& session) : session_(session) { routes(); }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ~Service() { stop(); }

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }

  /// Serves on the bound socket until stop() is called.
  bool listen() { return server_.listen_after_bind(); }

  void stop() {
    stopping_ = true;
    server_.stop();
  }

  bool running() const { return server_.is_running(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

private:
  static void reply_json(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply_json(res, {{"error", message}}, status);
  }

  static bool flag(const httplib::Request& req, const std::string& name) {
    return req.has_param(name) && req.get_param_value(name) == "true";
  }

  void routes() {
    server_.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
      reply_json(res, snapshot_state_json(*session_.snapshot()));
    });

    server_.Get("/solutions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto snap = session_.snapshot();
      reply_json(res, solutions_to_json(flag(req, "history") ? *snap->history : *snap->archive));
    });

    server_.Get("/grouped", [this](const httplib::Request& req, httplib::Response& res) {
      const auto snap = session_.snapshot();
      PreferenceRanges ranges = snap->ranges;
      try {
        if (req.has_param("ranges")) ranges = ranges_from_json(Json::parse(req.get_param_value("ranges")));
        ranges.validate(session_.objectives());
      } catch (const std::exception& e) {
        reply_error(res, 422, e.what());
        return;
      }
      const auto& solutions = flag(req, "history") ? *snap->history : *snap->archive;
      auto body = grouped_to_json(group_solutions(solutions, ranges));
      body["eval_count"] = snap->eval_count;
      reply_json(res, body);
    });

    server_.Post("/ranges", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const bool changed = session_.apply_ranges(ranges_from_json(Json::parse(req.body)));
        reply_json(res, {{"applied", true}, {"changed", changed}});
      } catch (const std::exception& e) {
        reply_error(res, 422, e.what());
      }
    });

    server_.Post("/start", [this](const httplib::Request&, httplib::Response& res) {
      switch (session_.start()) {
        case StartResult::started: reply_json(res, {{"status", "RUNNING"}}); break;
        case StartResult::already_running: reply_json(res, {{"status", "RUNNING"}}); break;
        case StartResult::exhausted: reply_error(res, 409, "EXHAUSTED"); break;
        case StartResult::stopped: reply_error(res, 409, "STOPPED"); break;
      }
    });

    server_.Post("/stop", [this](const httplib::Request&, httplib::Response& res) {
      session_.stop();
      reply_json(res, {{"stop_requested", true}});
    });

    server_.Post("/budget", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto body = Json::parse(req.body);
        const auto& evals = body.at("evals");
        if (!evals.is_number_integer() || evals.get<long long>() < 0) {
          throw ContractViolation("evals must be a non-negative integer");
        }
        session_.set_budget(evals.get<std::size_t>());
        reply_json(res, {{"budget", evals}});
      } catch (const std::exception& e) {
        reply_error(res, 422, e.what());
      }
    });

    server_.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream", [this, seen = std::uint64_t{0}](std::size_t, httplib::DataSink& sink) mutable {
            while (!stopping_) {
              const auto snap = session_.wait_for_snapshot(seen, std::chrono::milliseconds(200));
              if (snap->version <= seen) {
                if (!sink.is_writable()) return false;
                continue;
              }
              seen = snap->version;
              const std::string msg = "event: snapshot\ndata: " +
                                      Json{{"version", snap->version},
                                           {"eval_count", snap->eval_count},
                                           {"status", to_string(snap->status)}}
                                          .dump() +
                                      "\n\n";
              return sink.write(msg.data(), msg.size());
            }
            sink.done();
            return true;
          });
    });
  }

  Session& session_;
  httplib::Server server_;
  std::atomic<bool> stopping_{false};
};

}  // namespace pups
