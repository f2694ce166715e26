#include "extentlab/annotation_server.hpp"

#include <httplib.h>

#include "extentlab/errors.hpp"

namespace extentlab {

struct AnnotationServer::Impl {
  AnnotationService& service;
  httplib::Server server;

  explicit Impl(AnnotationService& s) : service(s) {}
};

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      reply(res, http_status(e.code()), {{"code", e.code()}, {"message", e.what()}});
    } catch (const nlohmann::json::exception& e) {
      reply(res, 400, {{"code", "parse_error"}, {"message", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"code", "internal_error"}, {"message", e.what()}});
    }
  };
}

Json body_of(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  Json body = Json::parse(req.body);
  if (!body.is_object()) throw InvalidArgument("request body must be an object");
  return body;
}

}  // namespace

int http_status(const std::string& code) {
  if (code == "not_found") return 404;
  if (code == "conflict_error") return 409;
  if (code == "io_error" || code == "capability_error") return 500;
  return 400;
}

std::pair<std::string, int> parse_listen_address(const std::string& address) {
  std::string host = "127.0.0.1";
  int port = 8080;
  const auto colon = address.rfind(':');
  const std::string host_part = colon == std::string::npos ? address : address.substr(0, colon);
  const std::string port_part = colon == std::string::npos ? "" : address.substr(colon + 1);
  if (!host_part.empty()) host = host_part;
  if (!port_part.empty()) {
    std::size_t used = 0;
    try {
      port = std::stoi(port_part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != port_part.size() || port < 0 || port > 65535) {
      throw InvalidArgument("bad listen address '" + address + "'");
    }
  }
  return {host, port};
}

AnnotationServer::AnnotationServer(AnnotationService& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto& server = impl_->server;
  AnnotationService& svc = service;

  server.Post("/sessions", guarded([&svc](const httplib::Request& req,
                                          httplib::Response& res) {
    const Json body = body_of(req);
    const auto session = svc.start_session(
        required_field<std::string>(body, "annotator_id", "session request"),
        required_field<std::vector<std::string>>(body, "sample_ids", "session request"),
        optional_field<int>(body, "k", 3, "session request"));
    reply(res, 201, to_json(session));
  }));
  server.Get(R"(/sessions/([^/]+)/view)",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const auto view = svc.view(req.matches[1]);
               reply(res, 200, view ? to_json(*view) : Json{{"end", true}});
             }));
  server.Post(R"(/sessions/([^/]+)/expand)",
              guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                reply(res, 200, to_json(svc.expand(req.matches[1])));
              }));
  server.Post(R"(/sessions/([^/]+)/entity-types)",
              guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                reply(res, 200, to_json(svc.reveal_entity_types(req.matches[1])));
              }));
  server.Post(R"(/sessions/([^/]+)/submit)",
              guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const Json body = body_of(req);
                const auto record = svc.submit(
                    req.matches[1], required_field<std::string>(body, "label", "submit"));
                reply(res, 200, to_json(record));
              }));
  server.Get("/annotations/export",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string annotator =
                   req.has_param("annotator") ? req.get_param_value("annotator") : "";
               Json records = Json::array();
               for (const auto& record : svc.store().records(annotator)) {
                 records.push_back(to_json(record));
               }
               reply(res, 200, {{"records", records}});
             }));
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  auto& server = impl_->server;
  if (port == 0) {
    const int bound = server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void AnnotationServer::serve() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace extentlab
