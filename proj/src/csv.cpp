#include "ctxrerank/csv.hpp"

#include "ctxrerank/errors.hpp"

namespace ctxrerank {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> open_delimited(const std::string& path,
                                        std::ifstream& in, char delim) {
  in.open(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::string header;
  if (!std::getline(in, header) || trim(header).empty()) {
    throw ValidationError("empty or headerless file: " + path);
  }
  return split_fields(header, delim);
}

}  // namespace ctxrerank
