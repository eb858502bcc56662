// File formats: Lie bialgebras and bialgebras as JSON with exact scalar
// strings, plus helpers for reading/writing files.
#pragma once

#include <string>

#include "ranq/bialg.hpp"
#include "ranq/liebialg.hpp"

namespace ranq {

std::string to_json(const LieBialgebra& g);
std::string to_json(const Bialgebra& a);

LieBialgebra lie_from_json(const std::string& text);
Bialgebra bialg_from_json(const std::string& text);

// Parses either kind (dispatch on "kind"); exactly one pointer is filled.
struct ParsedObject {
    bool is_lie = false;
    LieBialgebra lie;
    Bialgebra bialg;
};
ParsedObject parse_object(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

DoubleRepDR load_dr_json(const std::string& text);

}  // namespace ranq
