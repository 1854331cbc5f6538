#pragma once

// HTTP facade for the web UI and scripts.
//
//   POST /api/specs              upload a CSV or JSON catalogue -> 201 SpecHandle
//   GET  /api/specs/{id}         -> SpecHandle
//   POST /api/jobs               {spec_id, budget, profile} -> 202 JobRecord
//   GET  /api/jobs/{id}          -> JobRecord (with the report once done)
//   GET  /api/jobs/{id}/report   -> report JSON, 409 until done
//
// Specs and jobs are flat JSON files under the data directory and are
// reloaded on start. A stored report is served byte-for-byte as written.

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ctrlgame/catalogue.hpp"
#include "ctrlgame/catalogue_io.hpp"
#include "ctrlgame/profile.hpp"
#include "ctrlgame/report.hpp"
#include "ctrlgame/solver.hpp"

namespace ctrlgame {

struct SpecHandle {
  std::string spec_id;
  std::string digest;
  std::vector<std::string> assets;
  std::size_t uncertain_cells = 0;
  std::uint64_t case_count = 0;
};

inline nlohmann::json to_json(const SpecHandle& h) {
  nlohmann::json objectives = nlohmann::json::object();
  for (const auto& a : h.assets) objectives[a] = {"C", "I", "A"};
  return {{"spec_id", h.spec_id},
          {"digest", h.digest},
          {"assets", h.assets},
          {"objectives", std::move(objectives)},
          {"uncertainty", {{"cells", h.uncertain_cells}, {"cases", h.case_count}}}};
}

enum class JobState { Queued, Running, Done, Failed };

inline const char* to_string(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "failed";
}

inline JobState parse_job_state(const std::string& s) {
  if (s == "queued") return JobState::Queued;
  if (s == "running") return JobState::Running;
  if (s == "done") return JobState::Done;
  return JobState::Failed;
}

struct JobRecord {
  std::string job_id;
  std::string spec_id;
  Budget budget;
  AttackerProfile profile;
  JobState state = JobState::Queued;
  std::size_t completed = 0;
  std::size_t total = 0;
  std::string report;  // rendered report JSON, present iff done
  std::string error;   // present iff failed
  std::string created_at, started_at, finished_at;
};

inline nlohmann::json to_json(const JobRecord& r, bool with_report_text = false) {
  nlohmann::json j = {{"job_id", r.job_id},
                      {"spec_id", r.spec_id},
                      {"budget", r.budget.limit.to_string()},
                      {"profile", profile_to_json(r.profile)},
                      {"state", to_string(r.state)},
                      {"progress", {{"completed", r.completed}, {"total", r.total}}},
                      {"created_at", r.created_at}};
  if (!r.started_at.empty()) j["started_at"] = r.started_at;
  if (!r.finished_at.empty()) j["finished_at"] = r.finished_at;
  if (r.state == JobState::Failed) j["error"] = r.error;
  if (r.state == JobState::Done) {
    if (with_report_text) j["report"] = r.report;
    else j["result"] = nlohmann::json::parse(r.report);
  }
  return j;
}

/// Error with the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class JobService {
 public:
  /// Called after every finished case with (job id, completed, total), on the
  /// worker thread that ran it.
  using CaseHook = std::function<void(const std::string&, std::size_t, std::size_t)>;

  JobService(std::filesystem::path data_dir, unsigned workers = 2, CaseHook hook = {})
      : dir_(std::move(data_dir)), hook_(std::move(hook)) {
    std::filesystem::create_directories(dir_ / "specs");
    std::filesystem::create_directories(dir_ / "jobs");
    load();
    for (unsigned i = 0; i < std::max(1u, workers); ++i) pool_.emplace_back([this] { work(); });
  }

  ~JobService() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    pool_.clear();
  }

  JobService(const JobService&) = delete;
  JobService& operator=(const JobService&) = delete;

  /// Parses and stores a catalogue; the same content always yields the same id.
  SpecHandle add_spec(std::string_view body, SpecFormat format) {
    auto cat = parse_catalogue(body, format);
    auto handle = make_handle(cat);
    std::lock_guard lock(mu_);
    if (!specs_.contains(handle.spec_id)) {
      write_file(dir_ / "specs" / (handle.spec_id + ".json"), write_catalogue_json(cat));
      specs_.emplace(handle.spec_id, std::move(cat));
    }
    return handle;
  }

  std::optional<SpecHandle> spec(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = specs_.find(id);
    if (it == specs_.end()) return std::nullopt;
    return make_handle(it->second);
  }

  JobRecord submit(const std::string& spec_id, const Budget& budget, const AttackerProfile& profile) {
    std::lock_guard lock(mu_);
    auto it = specs_.find(spec_id);
    if (it == specs_.end()) throw ServiceError(404, "unknown spec '" + spec_id + "'");
    try {
      validate_profile(profile, it->second);
    } catch (const Error& e) {
      throw ServiceError(422, e.what());
    }
    auto cases = it->second.case_count();
    if (cases > kDefaultCaseLimit)
      throw ServiceError(422, std::to_string(cases) + " uncertainty cases exceed the case limit");
    JobRecord r;
    r.job_id = next_job_id();
    r.spec_id = spec_id;
    r.budget = budget;
    r.profile = profile;
    r.total = static_cast<std::size_t>(cases);
    r.created_at = now();
    persist(r);
    jobs_.emplace(r.job_id, r);
    queue_.push_back(r.job_id);
    cv_.notify_one();
    return r;
  }

  std::optional<JobRecord> job(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
  }

  /// Blocks until no job is queued or running. For tests and shutdown.
  void wait_idle() {
    std::unique_lock lock(mu_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && running_ == 0; });
  }

 private:
  static std::string now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  static SpecHandle make_handle(const ControlCatalogue& cat) {
    auto digest = catalogue_digest(cat);
    return {"spec-" + digest.substr(0, 16), digest, cat.assets(), cat.uncertain_cells().size(), cat.case_count()};
  }

  static void write_file(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

  static std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  void persist(const JobRecord& r) { write_file(dir_ / "jobs" / (r.job_id + ".json"), to_json(r, true).dump(2)); }

  std::string next_job_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%06llu", static_cast<unsigned long long>(++job_counter_));
    return buf;
  }

  void load() {
    for (const auto& entry : std::filesystem::directory_iterator(dir_ / "specs")) {
      if (entry.path().extension() != ".json") continue;
      auto cat = parse_catalogue_json(read_file(entry.path()));
      auto handle = make_handle(cat);
      specs_.emplace(handle.spec_id, std::move(cat));
    }
    std::vector<std::string> requeue;
    for (const auto& entry : std::filesystem::directory_iterator(dir_ / "jobs")) {
      if (entry.path().extension() != ".json") continue;
      auto j = nlohmann::json::parse(read_file(entry.path()));
      JobRecord r;
      r.job_id = j.at("job_id").get<std::string>();
      r.spec_id = j.at("spec_id").get<std::string>();
      r.budget = Budget::parse(j.at("budget").get<std::string>());
      r.profile = profile_from_json(j.at("profile"));
      r.state = parse_job_state(j.at("state").get<std::string>());
      r.completed = j.at("progress").at("completed").get<std::size_t>();
      r.total = j.at("progress").at("total").get<std::size_t>();
      r.created_at = j.value("created_at", "");
      r.started_at = j.value("started_at", "");
      r.finished_at = j.value("finished_at", "");
      r.error = j.value("error", "");
      r.report = j.value("report", "");
      if (r.state == JobState::Running) {
        r.state = JobState::Failed;
        r.error = "interrupted by service restart";
        r.finished_at = now();
        persist(r);
      } else if (r.state == JobState::Queued) {
        requeue.push_back(r.job_id);
      }
      auto number = std::strtoull(r.job_id.c_str() + 4, nullptr, 10);
      job_counter_ = std::max<std::uint64_t>(job_counter_, number);
      jobs_.emplace(r.job_id, std::move(r));
    }
    std::sort(requeue.begin(), requeue.end());
    queue_.assign(requeue.begin(), requeue.end());
  }

  void work() {
    while (true) {
      std::string id;
      ControlCatalogue cat;
      Budget budget;
      AttackerProfile profile;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (stopping_) return;
        id = queue_.front();
        queue_.pop_front();
        ++running_;
        auto& r = jobs_.at(id);
        r.state = JobState::Running;
        r.started_at = now();
        persist(r);
        cat = specs_.at(r.spec_id);
        budget = r.budget;
        profile = r.profile;
      }
      std::string report, error;
      try {
        SolveOptions options;
        options.on_case_done = [&](std::size_t done, std::size_t total) {
          {
            std::lock_guard lock(mu_);
            auto& r = jobs_.at(id);
            r.completed = done;
            r.total = total;
          }
          if (hook_) hook_(id, done, total);
        };
        auto outcome = solve(cat, budget, profile, options);
        report = render(build_report(outcome, cat, budget, profile), ReportFormat::Json);
      } catch (const std::exception& e) {
        error = e.what();
      }
      {
        std::lock_guard lock(mu_);
        auto& r = jobs_.at(id);
        if (error.empty()) {
          r.state = JobState::Done;
          r.report = std::move(report);
        } else {
          r.state = JobState::Failed;
          r.error = std::move(error);
        }
        r.finished_at = now();
        persist(r);
        --running_;
      }
      idle_cv_.notify_all();
    }
  }

  std::filesystem::path dir_;
  CaseHook hook_;
  mutable std::mutex mu_;
  std::condition_variable cv_, idle_cv_;
  std::map<std::string, ControlCatalogue> specs_;
  std::map<std::string, JobRecord> jobs_;
  std::deque<std::string> queue_;
  std::uint64_t job_counter_ = 0;
  std::size_t running_ = 0;
  bool stopping_ = false;
  std::vector<std::jthread> pool_;
};

namespace service_detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(2), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

}  // namespace service_detail

/// Registers the API routes on `server`. `cors_origin` is echoed in
/// Access-Control-Allow-Origin.
inline void mount_routes(httplib::Server& server, JobService& service, const std::string& cors_origin = "*") {
  using namespace service_detail;
  server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/api/specs", [&service](const httplib::Request& req, httplib::Response& res) {
    auto type = req.get_header_value("Content-Type");
    SpecFormat format = type.find("csv") != std::string::npos    ? SpecFormat::Csv
                        : type.find("json") != std::string::npos ? SpecFormat::Json
                                                                 : sniff_format(req.body);
    try {
      send_json(res, 201, to_json(service.add_spec(req.body, format)));
    } catch (const ParseError& e) {
      send_json(res, 400, {{"error", e.what()}, {"code", to_string(e.code())}, {"line", e.line()}, {"field", e.field()}});
    } catch (const Error& e) {
      send_json(res, 400, {{"error", e.what()}, {"code", to_string(e.code())}});
    }
  });

  server.Get(R"(/api/specs/([A-Za-z0-9-]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    if (auto h = service.spec(req.matches[1])) send_json(res, 200, to_json(*h));
    else send_error(res, 404, "unknown spec");
  });

  server.Post("/api/jobs", [&service](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      return send_error(res, 400, std::string("invalid JSON: ") + e.what());
    }
    if (!body.is_object() || !body.contains("spec_id") || !body["spec_id"].is_string())
      return send_error(res, 422, "spec_id is required");
    Budget budget;
    AttackerProfile profile;
    try {
      const auto& b = body.at("budget");
      if (b.is_string()) budget = Budget::parse(b.get<std::string>());
      else if (b.is_number_unsigned()) budget = Budget{Money::from_units(b.get<std::int64_t>())};
      else if (b.is_number_float() && b.get<double>() >= 0) budget = Budget::parse(b.dump());
      else throw Error(ErrorCode::InvalidArgument, "budget must be a non-negative decimal");
      profile = profile_from_json(body.at("profile"));
    } catch (const Error& e) {
      return send_error(res, 422, e.what());
    } catch (const nlohmann::json::exception&) {
      return send_error(res, 422, "budget and profile are required");
    }
    try {
      send_json(res, 202, to_json(service.submit(body["spec_id"].get<std::string>(), budget, profile)));
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.what());
    }
  });

  server.Get(R"(/api/jobs/([A-Za-z0-9-]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    if (auto r = service.job(req.matches[1])) send_json(res, 200, to_json(*r));
    else send_error(res, 404, "unknown job");
  });

  server.Get(R"(/api/jobs/([A-Za-z0-9-]+)/report)", [&service](const httplib::Request& req, httplib::Response& res) {
    auto r = service.job(req.matches[1]);
    if (!r) return send_error(res, 404, "unknown job");
    if (r->state != JobState::Done)
      return send_json(res, 409, {{"error", "report not ready"}, {"state", to_string(r->state)}});
    res.status = 200;
    res.set_content(r->report, "application/json");
  });
}

}  // namespace ctrlgame
