#include "bcz/io.hpp"

namespace bcz {

std::string config_echo(const std::map<std::string, std::string>& kv) {
  std::string out = "# bcz\n";
  std::string line = "#";
  for (const auto& [k, v] : kv) line += " " + k + "=" + v;
  out += line + "\n";
  return out;
}

void write_csv_row(std::ostream& os, const std::string& row) { os << row << "\n"; }

}  // namespace bcz
