#pragma once

#include "ogre/domain.hpp"
#include "ogre/petri.hpp"

#include <json.hpp>

#include <string>

// JSON readers and writers for the file formats the tools exchange. The
// writers produce byte-stable output: ordered keys, no floats, fixed
// spacing, so identical inputs always serialize identically.

namespace ogre {

using Json = nlohmann::ordered_json;

struct JsonFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PetriProgram program_from_json(const Json& j);
PetriProgram load_program(const std::string& path);

InvariantDomain domain_from_json(const Json& j, const PetriProgram& program);
InvariantDomain load_domain(const std::string& path,
                            const PetriProgram& program);
Json domain_to_json(const InvariantDomain& domain);

Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
std::string dump_stable(const Json& j);

} // namespace ogre
