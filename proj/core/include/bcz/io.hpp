#pragma once

#include <map>
#include <ostream>
#include <string>

namespace bcz {

/// Key=value lines prefixed with '#', echoed at the top of every output
/// file so each numerical artifact records the configuration that made it.
std::string config_echo(const std::map<std::string, std::string>& kv);

void write_csv_row(std::ostream& os, const std::string& row);

}  // namespace bcz
