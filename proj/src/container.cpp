#include "msa/container.hpp"

#include <fstream>

#include "msa/error.hpp"

namespace msa::jsonl {

Container read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  Container c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                       e.what());
    }
    if (lineno == 1) {
      if (!j.contains("schema") || !j.contains("version"))
        throw ParseError(path.string() +
                         ": first line must be a {schema, version} header");
      c.schema = j["schema"].get<std::string>();
      c.version = j["version"].get<int>();
    } else {
      c.records.push_back(std::move(j));
    }
  }
  if (lineno == 0) throw ParseError(path.string() + ": empty container file");
  return c;
}

Container read(const std::filesystem::path& path, const std::string& schema) {
  Container c = read(path);
  if (c.schema != schema)
    throw ParseError(path.string() + ": expected schema '" + schema +
                     "', found '" + c.schema + "'");
  return c;
}

void write(const std::filesystem::path& path, const std::string& schema,
           int version, std::span<const nlohmann::json> records) {
  std::ofstream out(path, std::ios::binary);  // binary: fixed \n line endings
  if (!out) throw Error("cannot write " + path.string());
  out << nlohmann::json{{"schema", schema}, {"version", version}}.dump()
      << '\n';
  for (const auto& r : records) out << r.dump() << '\n';
  if (!out) throw Error("short write to " + path.string());
}

}  // namespace msa::jsonl
