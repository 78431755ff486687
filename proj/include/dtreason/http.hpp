#pragma once

// Binds a Router to an httplib server. Kept apart from service.hpp so that
// only the programs that listen on a socket pull in httplib.

#include <httplib.h>

#include "dtreason/service.hpp"

namespace dtreason {

inline void mount(httplib::Server& srv, Router& router) {
  auto forward = [&router](const httplib::Request& req, httplib::Response& res) {
    HttpResponse r = router.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  const std::string any = R"(/sessions(/.*)?)";
  srv.Get(any, forward);
  srv.Post(any, forward);
  srv.Delete(any, forward);
  srv.Options(any, [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

}  // namespace dtreason
