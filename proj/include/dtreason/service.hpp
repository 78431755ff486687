#pragma once

// HTTP-shaped request handling over in-memory sessions. Every mutating
// request is turned into one script command and run through ScriptRunner,
// so the service and `dtreason session --format structured` share payloads
// and the session log doubles as a snapshot.
//
//   POST   /sessions                     -> 201 {id}
//   DELETE /sessions/{id}
//   POST   /sessions/{id}/models         tree JSON -> 201 {tree_id, trees}
//   POST   /sessions/{id}/schema         schema JSON
//   POST   /sessions/{id}/instances      {name, label, minconf?, features?, trees?} -> 201
//   GET    /sessions/{id}/instances
//   POST   /sessions/{id}/constraints    {text} -> 201 {constraints}
//   GET    /sessions/{id}/constraints
//   POST   /sessions/{id}/retract        {text} | {last: true}
//   POST   /sessions/{id}/solve          {minimize?, project?, eps?, global?} -> answer bundle
//   POST   /sessions/{id}/verbosity      {level}
//   GET    /sessions/{id}/transcript     {text, script}
//   POST   /sessions/{id}/reset          {keep_model?}
//
// Errors are {error, kind[, position]}: 404 unknown session or route, 400
// malformed input, 409 duplicate name.

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dtreason/script.hpp"

namespace dtreason {

struct HttpResponse {
  int status = 200;
  json body = json::object();
};

class Router {
 public:
  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path + "/") {
      if (c == '/') {
        if (!cur.empty()) parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (parts.empty() || parts[0] != "sessions") return error(404, "not_found", "no such route");
    if (parts.size() == 1) {
      if (method != "POST") return error(404, "not_found", "no such route");
      return {201, {{"id", create()}}};
    }
    std::shared_ptr<Entry> e = find(parts[1]);
    if (!e) return error(404, "no_such_session", "unknown session '" + parts[1] + "'");
    if (parts.size() == 2) {
      if (method != "DELETE") return error(404, "not_found", "no such route");
      std::lock_guard lock(mu_);
      sessions_.erase(parts[1]);
      return {200, {{"deleted", parts[1]}}};
    }
    if (parts.size() != 3) return error(404, "not_found", "no such route");
    json req;
    if (!body.empty()) {
      try {
        req = json::parse(body);
      } catch (const json::exception& ex) {
        return error(400, "bad_json", ex.what());
      }
    }
    std::lock_guard lock(e->mu);
    try {
      return route(*e, method, parts[2], req);
    } catch (const ParseError& ex) {
      HttpResponse r = error(400, "parse_error", ex.detail());
      r.body["position"] = ex.position();
      return r;
    } catch (const DuplicateError& ex) {
      return error(409, "duplicate", ex.what());
    } catch (const NoSuchConstraint& ex) {
      return error(400, "no_such_constraint", ex.what());
    } catch (const NameError& ex) {
      return error(400, "unknown_name", ex.what());
    } catch (const ValidationError& ex) {
      return error(400, "invalid", ex.what());
    } catch (const json::exception& ex) {
      return error(400, "bad_request", ex.what());
    } catch (const std::invalid_argument& ex) {
      return error(400, "bad_request", ex.what());
    }
  }

  std::size_t session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

 private:
  struct Entry {
    std::mutex mu;
    Session session;
    std::string transcript;
    std::chrono::system_clock::time_point created = std::chrono::system_clock::now();
  };

  static HttpResponse error(int status, const std::string& kind, const std::string& msg) {
    return {status, {{"error", msg}, {"kind", kind}}};
  }

  std::string create() {
    std::lock_guard lock(mu_);
    std::string id;
    do {
      std::ostringstream o;
      o << std::hex << rng_();
      id = o.str();
    } while (sessions_.count(id));
    sessions_[id] = std::make_shared<Entry>();
    return id;
  }

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  static std::string text_of(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number() || j.is_boolean()) return j.dump();
    throw ValidationError("expected a string or number, got " + j.dump());
  }

  static std::string single_line(const std::string& s) {
    if (s.find_first_of("\r\n") != std::string::npos) throw ValidationError("text must be a single line");
    return detail::trim(s);
  }

  // Runs one command; returns the structured bundle if it was a solve.
  static std::optional<json> run(Entry& e, const std::string& line) {
    std::ostringstream out;
    ScriptRunner runner(e.session, out, ScriptRunner::Format::Structured);
    runner.on_solve = [&e](const AnswerBundle& b) { e.transcript += e.session.render_bundle(b); };
    runner.command(line);
    std::string s = out.str();
    if (s.empty()) return std::nullopt;
    return json::parse(s);
  }

  static json constraint_list(const Session& s) {
    json out = json::array();
    for (const auto& [text, c] : s.constraints()) out.push_back({{"text", text}, {"parsed", render(c)}});
    return out;
  }

  static json instance_list(const Session& s) {
    json out = json::array();
    for (const auto& i : s.instances()) {
      json f = json::object();
      for (const auto& [k, v] : i.features) f[k] = value_str(v);
      out.push_back({{"name", i.name}, {"label", i.label}, {"minconf", i.minconf.str()}, {"features", f},
                     {"trees", i.trees}});
    }
    return out;
  }

  HttpResponse route(Entry& e, const std::string& method, const std::string& what, const json& req) {
    Session& s = e.session;
    if (method == "GET") {
      if (what == "transcript") return {200, {{"text", e.transcript}, {"script", to_script(s)}}};
      if (what == "constraints") return {200, {{"constraints", constraint_list(s)}}};
      if (what == "instances") return {200, {{"instances", instance_list(s)}}};
      return error(404, "not_found", "no such route");
    }
    if (method != "POST") return error(404, "not_found", "no such route");
    if (what == "models") {
      if (!req.is_object()) throw ValidationError("expected a tree object");
      run(e, "model-inline " + req.dump());
      json ids = json::array();
      for (const auto& t : s.trees()) ids.push_back(t.id());
      return {201, {{"tree_id", s.trees().back().id()}, {"trees", ids}}};
    }
    if (what == "schema") {
      if (!req.is_object()) throw ValidationError("expected a schema object");
      run(e, "schema-inline " + req.dump());
      return {200, {{"features", static_cast<int>(s.schema().size())}}};
    }
    if (what == "instances") {
      std::string cmd = "instance " + single_line(req.at("name").get<std::string>()) +
                        " label=" + Session::quote_arg(single_line(text_of(req.at("label"))));
      if (req.contains("minconf")) cmd += " minconf=" + single_line(text_of(req["minconf"]));
      if (req.contains("features"))
        for (const auto& [k, v] : req["features"].items())
          cmd += " set." + single_line(k) + "=" + Session::quote_arg(single_line(text_of(v)));
      if (req.contains("trees")) {
        std::string ts;
        for (const auto& t : req["trees"]) ts += (ts.empty() ? "" : ",") + single_line(t.get<std::string>());
        cmd += " trees=" + ts;
      }
      run(e, cmd);
      return {201, {{"instances", instance_list(s)}, {"constraints", constraint_list(s)}}};
    }
    if (what == "constraints") {
      std::string text = single_line(req.at("text").get<std::string>());
      if (text.empty()) throw ParseError("empty constraint", 0);
      run(e, "constraint " + text);
      return {201, {{"constraints", constraint_list(s)}}};
    }
    if (what == "retract") {
      if (req.value("last", false)) run(e, "retract last");
      else run(e, "retract " + single_line(req.at("text").get<std::string>()));
      return {200, {{"constraints", constraint_list(s)}}};
    }
    if (what == "solve") {
      std::string cmd = "solveopt";
      if (req.contains("minimize") && !req["minimize"].is_null())
        cmd += " minimize=" + Session::quote_arg(single_line(req["minimize"].get<std::string>()));
      if (req.contains("project")) {
        std::string p;
        for (const auto& x : req["project"]) p += (p.empty() ? "" : ",") + single_line(x.get<std::string>());
        if (!p.empty()) cmd += " project=" + p;
      }
      if (req.contains("eps")) cmd += " eps=" + single_line(text_of(req["eps"]));
      if (req.value("global", false)) cmd += " global";
      return {200, *run(e, cmd)};
    }
    if (what == "verbosity") {
      run(e, "verbosity " + text_of(req.at("level")));
      return {200, {{"verbosity", s.verbosity()}}};
    }
    if (what == "reset") {
      run(e, req.value("keep_model", false) ? "reset keep_model" : "reset");
      return {200, {{"trees", static_cast<int>(s.trees().size())}}};
    }
    return error(404, "not_found", "no such route");
  }

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace dtreason
