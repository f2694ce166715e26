#ifndef EXTENTLAB_ANNOTATION_SERVER_HPP_
#define EXTENTLAB_ANNOTATION_SERVER_HPP_

#include <memory>
#include <string>

#include "extentlab/annotation.hpp"

namespace extentlab {

// HTTP/JSON front end for AnnotationService.
//   POST /sessions                  {"annotator_id","sample_ids","k"?}
//   GET  /sessions/{id}/view
//   POST /sessions/{id}/expand
//   POST /sessions/{id}/entity-types
//   POST /sessions/{id}/submit      {"label"}
//   GET  /annotations/export        ?annotator=
// Errors answer with {"code","message"}.
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationService& service);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws IoError.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status for an error code.
int http_status(const std::string& code);

// "host:port" with either part optional; defaults 127.0.0.1 and 8080.
std::pair<std::string, int> parse_listen_address(const std::string& address);

}  // namespace extentlab

#endif  // EXTENTLAB_ANNOTATION_SERVER_HPP_
