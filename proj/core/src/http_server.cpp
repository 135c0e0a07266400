#include "microlearn/http_server.hpp"

#include "microlearn/codec.hpp"

#include <httplib.h>

namespace microlearn {

namespace {

constexpr const char* kJson = "application/json";

int status_of(ServiceError::Code code) {
  switch (code) {
    case ServiceError::Code::bad_request: return 400;
    case ServiceError::Code::forbidden: return 403;
    case ServiceError::Code::not_found: return 404;
    case ServiceError::Code::conflict: return 409;
    case ServiceError::Code::storage: return 503;
  }
  return 400;
}

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  Json body = Json::object();
  body["error"] = Json{{"code", code}, {"message", message}};
  send(res, status, body);
}

[[noreturn]] void fail(ServiceError::Code code, const std::string& message) { throw ServiceError(code, message); }

enum class Role { learner, instructor, admin };

Role role_of(const httplib::Request& req) {
  const auto role = req.get_header_value("X-Role");
  if (role == "admin") return Role::admin;
  if (role == "instructor") return Role::instructor;
  if (role.empty() || role == "learner") return Role::learner;
  fail(ServiceError::Code::bad_request, "X-Role must be learner, instructor or admin");
}

void require_role(const httplib::Request& req, Role needed) {
  const auto have = role_of(req);
  if (static_cast<int>(have) < static_cast<int>(needed)) {
    fail(ServiceError::Code::forbidden, needed == Role::admin ? "admin role required" : "instructor role required");
  }
}

Json parse_body(const httplib::Request& req) {
  try {
    auto body = Json::parse(req.body);
    if (!body.is_object()) fail(ServiceError::Code::bad_request, "request body must be a JSON object");
    return body;
  } catch (const Json::parse_error& e) {
    fail(ServiceError::Code::bad_request, std::string("malformed JSON body: ") + e.what());
  }
}

Json units_json(const ConceptGraph& graph, const std::vector<std::string>& ids) {
  Json out = Json::array();
  for (const auto& id : ids) {
    if (const auto* u = graph.find_unit(id)) out.push_back(to_json(*u));
  }
  return out;
}

Json recommendation_json(const Recommendation& rec, const ConceptGraph& graph) {
  auto j = to_json(rec);
  j["unit_details"] = units_json(graph, rec.units);
  return j;
}

std::optional<Timestamp> query_time(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  try {
    return parse_timestamp(req.get_param_value(key));
  } catch (const std::invalid_argument& e) {
    fail(ServiceError::Code::bad_request, std::string(key) + ": " + e.what());
  }
}

std::vector<Rational> score_list(const Json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_array()) {
    fail(ServiceError::Code::bad_request, std::string("'") + key + "' must be an array of scores");
  }
  std::vector<Rational> out;
  for (std::size_t i = 0; i < body[key].size(); ++i) {
    out.push_back(rational_from_json(body[key][i], std::string(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

struct HttpServer::Impl {
  LearningService& service;
  httplib::Server server;

  explicit Impl(LearningService& s) : service(s) { routes(); }

  /// The caller's pseudonym; X-Learner-Identity is required.
  std::string caller(const httplib::Request& req) const {
    const auto identity = req.get_header_value("X-Learner-Identity");
    if (identity.empty()) fail(ServiceError::Code::bad_request, "X-Learner-Identity header is required");
    return service.pseudonym_for(identity);
  }

  /// Learners may act only on their own pseudonym.
  void require_self(const httplib::Request& req, const std::string& pseudonym) const {
    if (caller(req) != pseudonym) fail(ServiceError::Code::forbidden, "pseudonym does not match the caller");
  }

  /// Learner views: the learner themself, or an instructor.
  void require_view(const httplib::Request& req, const std::string& pseudonym) const {
    if (role_of(req) != Role::learner) return;
    require_self(req, pseudonym);
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const ServiceError& e) {
        send_error(res, status_of(e.code()), to_string(e.code()), e.what());
      } catch (const CodecError& e) {
        send_error(res, 400, "bad_request", e.what());
      } catch (const Json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
      } catch (const StorageError& e) {
        send_error(res, 503, "storage", e.what());
      } catch (const std::invalid_argument& e) {
        send_error(res, 400, "bad_request", e.what());
      }
    };
  }

  void routes() {
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      } catch (...) {
        send_error(res, 500, "internal", "unknown error");
      }
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.body.empty()) {
        send_error(res, res.status, res.status == 404 ? "not_found" : "bad_request",
                   "no route for " + req.method + " " + req.path);
      }
    });

    server.Get("/v1/health", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json body = Json::object();
      body["status"] = "ok";
      body["events"] = service.log().size();
      send(res, 200, body);
    }));

    server.Get("/v1/graph", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto cat = service.catalog();
      auto body = to_json(cat->graph);
      body["text"] = cat->graph_text;
      send(res, 200, body);
    }));

    server.Get("/v1/units", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto cat = service.catalog();
      Json body = Json::array();
      for (const auto& u : cat->graph.units()) body.push_back(to_json(u));
      send(res, 200, body);
    }));

    server.Get(R"(/v1/units/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto cat = service.catalog();
      const auto* u = cat->graph.find_unit(req.matches[1].str());
      if (u == nullptr) fail(ServiceError::Code::not_found, "unknown unit '" + req.matches[1].str() + "'");
      send(res, 200, to_json(*u));
    }));

    server.Get("/v1/quizzes", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto cat = service.catalog();
      Json body = Json::array();
      for (const auto& [id, quiz] : cat->quizzes) {
        body.push_back(Json{{"id", id}, {"kind", to_string(quiz.kind)}, {"questions", quiz.questions.size()}});
      }
      send(res, 200, body);
    }));

    server.Get(R"(/v1/quizzes/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto cat = service.catalog();
      const auto it = cat->quizzes.find(req.matches[1].str());
      if (it == cat->quizzes.end()) fail(ServiceError::Code::not_found, "unknown quiz '" + req.matches[1].str() + "'");
      send(res, 200, to_json(it->second, false));
    }));

    server.Post("/v1/submissions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = caller(req);
      const auto body = parse_body(req);
      if (!body.contains("quiz_id") || !body["quiz_id"].is_string()) {
        fail(ServiceError::Code::bad_request, "'quiz_id' must be a string");
      }
      if (!body.contains("answers")) fail(ServiceError::Code::bad_request, "'answers' is required");
      const auto answers = answers_from_json(body["answers"]);
      const auto result = service.submit(learner, body["quiz_id"].get<std::string>(), answers);
      const auto cat = service.catalog();
      Json out = Json::object();
      out["learner"] = learner;
      out["report"] = to_json(result.report);
      out["state"] = to_json(result.state);
      out["recommendation"] = result.recommendation ? recommendation_json(*result.recommendation, cat->graph) : Json();
      out["reminder"] = result.reminder ? to_json(*result.reminder) : Json();
      out["goal_satisfied"] = result.goal_satisfied;
      send(res, 201, out);
    }));

    server.Get(R"(/v1/learners/([^/]+)/state)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto p = req.matches[1].str();
      require_view(req, p);
      send(res, 200, to_json(service.learner(p).state));
    }));

    server.Get(R"(/v1/learners/([^/]+)/recommendations)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto p = req.matches[1].str();
      require_view(req, p);
      const auto cat = service.catalog();
      Json body = Json::array();
      for (const auto& rec : service.learner(p).recommendations) body.push_back(recommendation_json(rec, cat->graph));
      send(res, 200, body);
    }));

    server.Get(R"(/v1/learners/([^/]+)/reminders)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto p = req.matches[1].str();
      require_view(req, p);
      Json body = Json::array();
      for (const auto& r : service.learner(p).reminders) body.push_back(to_json(r));
      send(res, 200, body);
    }));

    server.Get(R"(/v1/learners/([^/]+)/reports)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto p = req.matches[1].str();
      require_view(req, p);
      Json body = Json::array();
      for (const auto& r : service.learner(p).reports) body.push_back(to_json(r));
      send(res, 200, body);
    }));

    server.Post(R"(/v1/learners/([^/]+)/units/([^/]+)/complete)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto p = req.matches[1].str();
      require_self(req, p);
      send(res, 200, to_json(service.complete_unit(p, req.matches[2].str())));
    }));

    server.Post(R"(/v1/learners/([^/]+)/goal-satisfied)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto p = req.matches[1].str();
      require_self(req, p);
      send(res, 200, to_json(service.acknowledge_goal(p)));
    }));

    server.Post("/v1/feedback", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = caller(req);
      const auto body = parse_body(req);
      if (!body.contains("unit_id") || !body["unit_id"].is_string()) {
        fail(ServiceError::Code::bad_request, "'unit_id' must be a string");
      }
      if (!body.contains("rating") || !body["rating"].is_number_integer()) {
        fail(ServiceError::Code::bad_request, "'rating' must be an integer 1..5");
      }
      std::optional<FeedbackTag> tag;
      if (body.contains("tag") && !body["tag"].is_null()) {
        if (!body["tag"].is_string()) fail(ServiceError::Code::bad_request, "'tag' must be a string");
        tag = feedback_tag_from_string(body["tag"].get<std::string>());
      }
      service.feedback(learner, body["unit_id"].get<std::string>(), body["rating"].get<int>(), tag);
      send(res, 201, Json{{"status", "recorded"}});
    }));

    server.Get("/v1/reports/demand", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_role(req, Role::instructor);
      TimeWindow window{query_time(req, "from"), query_time(req, "to")};
      Json body = Json::array();
      for (const auto& e : service.demand(window)) body.push_back(to_json(e));
      send(res, 200, body);
    }));

    server.Get("/v1/reports/quality", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_role(req, Role::instructor);
      Json body = Json::array();
      for (const auto& e : service.quality()) body.push_back(to_json(e));
      send(res, 200, body);
    }));

    server.Post("/v1/reports/cohort", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_role(req, Role::instructor);
      const auto body = parse_body(req);
      const auto a = score_list(body, "a");
      const auto b = score_list(body, "b");
      send(res, 200, to_json(service.cohort(a, b)));
    }));

    server.Get("/v1/export/log", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_role(req, Role::instructor);
      res.status = 200;
      res.set_content(service.export_log(), "application/x-ndjson");
    }));

    server.Post("/v1/admin/reload", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_role(req, Role::admin);
      service.reload();
      send(res, 200, Json{{"status", "reloaded"}, {"events", service.log().size()}});
    }));

    server.Post("/v1/admin/fire-reminders", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_role(req, Role::admin);
      Json body = Json::array();
      for (const auto& f : service.fire_due_reminders()) {
        body.push_back(Json{{"learner", f.learner},
                            {"recommendation_id", f.recommendation_id},
                            {"at", format_timestamp(f.at)},
                            {"fired_count", f.fired_count},
                            {"expired", f.expired}});
      }
      send(res, 200, body);
    }));
  }
};

HttpServer::HttpServer(LearningService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::run() { return impl_->server.listen_after_bind(); }
void HttpServer::stop() { impl_->server.stop(); }
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace microlearn
