#pragma once

#include <map>
#include <string>

#include "pasa/paramset.hpp"

namespace pasa {

// Container file for a ParamSet plus string metadata.
//
// Layout (all integers little-endian):
//   bytes 0..7   magic "PASAPS01"
//   u32          metadata pair count M
//   M records    { u32 key_len, key bytes, u32 value_len, value bytes }
//   u32          tensor count N
//   N records    { u32 name_len, name bytes, u32 ndim, ndim x u64 dims,
//                  prod(dims) x f64 values }
// Metadata pairs are written sorted by key; tensors in ParamSet order.
void save_paramset(const std::string& path, const ParamSet& params,
                   const std::map<std::string, std::string>& metadata);

struct LoadedParamSet {
  ParamSet params;
  std::map<std::string, std::string> metadata;
};

LoadedParamSet load_paramset(const std::string& path);

}  // namespace pasa
