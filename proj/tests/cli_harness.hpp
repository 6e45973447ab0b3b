#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "choquet/cli.hpp"

namespace cli_harness {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

inline Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "choquet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = choquet::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct GoldenCase {
  std::string name;
  int exit_code = 0;
  std::vector<std::string> args;
};

inline std::vector<GoldenCase> golden_cases(const std::string& dir) {
  std::ifstream in(dir + "/cases.txt");
  std::vector<GoldenCase> cases;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream words(line);
    GoldenCase c;
    words >> c.name >> c.exit_code;
    for (std::string w; words >> w;) c.args.push_back(w);
    cases.push_back(std::move(c));
  }
  return cases;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace cli_harness
