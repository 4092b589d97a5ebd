#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ckm/ckm_builder.hpp"
#include "ckm/tensor.hpp"

namespace ckm {

// Shortest decimal form that parses back to the identical double.
std::string dtos(double v);

// Strict parse: the whole token must convert. Throws std::runtime_error.
double stod_strict(const std::string& s);

// Key/value metadata carried in the map file header (seeds, config notes).
// Keys must not contain whitespace; values run to end of line.
using MetaList = std::vector<std::pair<std::string, std::string>>;

// Versioned text format:
//   clusterckm/1
//   meta <key> <value>        (zero or more)
//   clusters <K>
//   cluster <n>               (K times, each followed by n "x y" lines)
// Doubles use shortest round-trip formatting, so save/load is bit-exact.
void save_ckm(std::ostream& os, const ClusterCkm& ckm, const MetaList& meta = {});
void save_ckm(const std::string& path, const ClusterCkm& ckm, const MetaList& meta = {});

// Throws std::runtime_error on a missing/foreign magic line or malformed body.
ClusterCkm load_ckm(std::istream& is, MetaList* meta = nullptr);
ClusterCkm load_ckm(const std::string& path, MetaList* meta = nullptr);

// Complex tensor dump, same round-trip guarantee:
//   tensor3c/1
//   dims <n1> <n2> <n3>
//   <re> <im>                 (n1*n2*n3 lines, mode-1-fastest order)
void save_tensor(std::ostream& os, const Tensor3C& t);
void save_tensor(const std::string& path, const Tensor3C& t);
Tensor3C load_tensor(std::istream& is);
Tensor3C load_tensor(const std::string& path);

}  // namespace ckm
