#pragma once

#include <string>

#include "ising/model.hpp"

namespace ising {

/// Named parse failures for the model file format.
enum class ModelParseErrorKind { MalformedField, DuplicateEdge, SelfLoop, OutOfRangeIndex };

class ModelParseError : public InvalidModelError {
 public:
  ModelParseError(ModelParseErrorKind kind, const std::string& what)
      : InvalidModelError(what), kind_(kind) {}
  ModelParseErrorKind kind() const { return kind_; }

 private:
  ModelParseErrorKind kind_;
};

/// Model file format: a JSON document with `num_vertices` and `edges`, each
/// edge a record {u, v, j} with 0-based indices. The writer canonicalizes
/// u < v and sorts edges, and parse(write(m)) round-trips bit-exactly.
IsingModel parse_model_file(const std::string& text);
std::string write_model_file(const IsingModel& m);

IsingModel load_model(const std::string& path);
void save_model(const IsingModel& m, const std::string& path);

}  // namespace ising
