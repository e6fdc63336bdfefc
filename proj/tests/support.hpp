#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "amortlab/parse.hpp"

namespace amortlab::testing {

inline std::string corpus_path(const std::string& name) { return std::string(AMORTLAB_CORPUS_DIR) + "/" + name; }

inline std::string read_corpus(const std::string& name) {
  std::ifstream in(corpus_path(name));
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline Program load(const std::string& name) { return parse(read_corpus(name)); }

}  // namespace amortlab::testing
