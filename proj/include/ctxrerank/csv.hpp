#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace ctxrerank {

// Minimal delimited-text reading for the project's file formats. Fields
// never contain commas, so no quoting support is needed.
std::vector<std::string> split_fields(const std::string& line, char delim = ',');

// Opens `path` and returns the header fields; throws ValidationError on
// a missing file or empty header.
std::vector<std::string> open_delimited(const std::string& path,
                                        std::ifstream& in, char delim = ',');

std::string trim(const std::string& s);

}  // namespace ctxrerank
