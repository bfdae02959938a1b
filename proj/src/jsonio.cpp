#include "ogre/jsonio.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ogre {

namespace {

Sort sort_from_string(const std::string& s) {
  if (s == "Int")
    return Sort::Int;
  if (s == "Bool")
    return Sort::Bool;
  throw JsonFormatError("unknown sort: " + s);
}

std::vector<PlaceIdx> place_list(const Json& j, const PetriProgram& program,
                                 const char* field) {
  if (!j.is_array())
    throw JsonFormatError(std::string(field) + " must be an array");
  std::vector<PlaceIdx> out;
  for (const auto& e : j)
    out.push_back(program.place_index(e.get<std::string>()));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

} // namespace

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw JsonFormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw JsonFormatError(path + ": " + e.what());
  }
}

std::string dump_stable(const Json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw JsonFormatError("cannot write " + path);
  out << dump_stable(j);
}

PetriProgram program_from_json(const Json& j) {
  PetriProgram p;
  if (!j.contains("variables") || !j.contains("places") ||
      !j.contains("transitions") || !j.contains("initial_marking"))
    throw JsonFormatError(
        "program needs variables, places, transitions, initial_marking");
  for (const auto& v : j.at("variables"))
    p.variables.declare(v.at("name").get<std::string>(),
                        sort_from_string(v.at("sort").get<std::string>()));
  for (const auto& e : j.at("places"))
    p.places.push_back(e.get<std::string>());
  {
    std::set<std::string> unique(p.places.begin(), p.places.end());
    if (unique.size() != p.places.size())
      throw JsonFormatError("duplicate place names");
  }
  p.initial_marking = place_list(j.at("initial_marking"), p, "initial_marking");
  if (j.contains("error_places"))
    p.error_places = place_list(j.at("error_places"), p, "error_places");

  std::set<std::string> trans_ids;
  for (const auto& t : j.at("transitions")) {
    Transition tr;
    tr.id = t.at("id").get<std::string>();
    if (!trans_ids.insert(tr.id).second)
      throw JsonFormatError("duplicate transition id: " + tr.id);
    if (std::find(p.places.begin(), p.places.end(), tr.id) != p.places.end())
      throw JsonFormatError("id used for both a place and a transition: " +
                            tr.id);
    tr.pre = place_list(t.at("pre"), p, "pre");
    tr.succ = place_list(t.at("succ"), p, "succ");
    Formula guard = mk_true();
    if (t.contains("assume"))
      guard = parse_formula(t.at("assume").get<std::string>(), p.variables);
    std::map<Formula, Formula> assigns;
    if (t.contains("assign")) {
      for (const auto& [name, rhs] : t.at("assign").items()) {
        auto var = p.variables.lookup(name);
        if (!var)
          throw JsonFormatError("assignment to undeclared variable " + name);
        assigns[*var] = parse_formula(rhs.get<std::string>(), p.variables);
      }
    }
    std::set<Formula> havocs;
    if (t.contains("havoc")) {
      for (const auto& name : t.at("havoc")) {
        auto var = p.variables.lookup(name.get<std::string>());
        if (!var)
          throw JsonFormatError("havoc of undeclared variable " +
                                name.get<std::string>());
        havocs.insert(*var);
      }
    }
    tr.statement = Statement(guard, std::move(assigns), std::move(havocs));
    p.transitions.push_back(std::move(tr));
  }
  return p;
}

PetriProgram load_program(const std::string& path) {
  return program_from_json(load_json_file(path));
}

InvariantDomain domain_from_json(const Json& j, const PetriProgram& program) {
  if (!j.contains("components") || !j.at("components").is_array() ||
      j.at("components").empty())
    throw JsonFormatError("domain needs a nonempty components array");
  std::vector<DomainComponent> components;
  for (const auto& c : j.at("components")) {
    const Json& post = c.at("post");
    std::string mode = post.at("mode").get<std::string>();
    std::map<std::pair<int, std::string>, int> entries;
    if (post.contains("table")) {
      for (const auto& e : post.at("table"))
        entries[{e.at("from").get<int>(),
                 e.at("transition").get<std::string>()}] =
            e.at("to").get<int>();
    }
    if (mode == "predicates") {
      std::vector<Formula> preds;
      for (const auto& s : post.at("predicates"))
        preds.push_back(parse_formula(s.get<std::string>(), program.variables));
      components.push_back(DomainComponent::from_predicates(std::move(preds)));
    } else {
      std::vector<Formula> formulas;
      for (const auto& s : c.at("formulas"))
        formulas.push_back(
            parse_formula(s.get<std::string>(), program.variables));
      PostMode m;
      if (mode == "table")
        m = PostMode::Table;
      else if (mode == "strongest")
        m = PostMode::Strongest;
      else
        throw JsonFormatError("unknown post mode: " + mode);
      components.push_back(
          DomainComponent(std::move(formulas), m, std::move(entries)));
    }
  }
  return InvariantDomain(std::move(components));
}

InvariantDomain load_domain(const std::string& path,
                            const PetriProgram& program) {
  return domain_from_json(load_json_file(path), program);
}

Json domain_to_json(const InvariantDomain& domain) {
  Json j;
  j["components"] = Json::array();
  for (const DomainComponent& c : domain.components()) {
    Json jc;
    if (c.mode() == PostMode::Predicates) {
      Json preds = Json::array();
      for (const Formula& p : c.predicates())
        preds.push_back(p.to_string());
      jc["post"] = {{"mode", "predicates"}, {"predicates", preds}};
    } else {
      Json formulas = Json::array();
      for (const Formula& f : c.formulas())
        formulas.push_back(f.to_string());
      jc["formulas"] = formulas;
      Json post;
      post["mode"] = c.mode() == PostMode::Table ? "table" : "strongest";
      if (!c.entries().empty()) {
        Json table = Json::array();
        for (const auto& [key, to] : c.entries())
          table.push_back({{"from", key.first},
                           {"transition", key.second},
                           {"to", to}});
        post["table"] = table;
      }
      jc["post"] = post;
    }
    j["components"].push_back(jc);
  }
  return j;
}

} // namespace ogre
