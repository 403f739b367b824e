// Copyright 2026 The SkimNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "skimnet/numerics/param_store.hpp"

#include <fstream>
#include <sstream>

#include "skimnet/binary_io.hpp"
#include "skimnet/error.hpp"

namespace skimnet::numerics {

namespace {

constexpr char kMagic[4] = {'S', 'K', 'N', 'P'};

void fnv_mix(std::uint64_t& h, const void* bytes, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

ParamStore::ParamStore(const ParamStore& other) {
  for (const auto& [name, p] : other.params_) params_.emplace(name, std::make_unique<Param>(*p));
}

ParamStore& ParamStore::operator=(const ParamStore& other) {
  if (this != &other) {
    ParamStore copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Param& ParamStore::add(std::string name, Tensor value) {
  if (params_.count(name)) throw ValidationError("duplicate parameter '" + name + "'");
  auto p = std::make_unique<Param>();
  p->name = name;
  p->grad = Tensor(value.shape());
  p->value = std::move(value);
  auto& ref = *p;
  params_.emplace(std::move(name), std::move(p));
  return ref;
}

Param& ParamStore::get(std::string_view name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("unknown parameter '" + std::string(name) + "'");
  return *it->second;
}

const Param& ParamStore::get(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("unknown parameter '" + std::string(name) + "'");
  return *it->second;
}

bool ParamStore::contains(std::string_view name) const { return params_.find(name) != params_.end(); }

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

std::vector<Param*> ParamStore::params() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& [name, p] : params_) out.push_back(p.get());
  return out;
}

std::vector<Param*> ParamStore::params_with_prefix(std::string_view prefix) {
  std::vector<Param*> out;
  for (auto& [name, p] : params_) {
    if (std::string_view(name).substr(0, prefix.size()) == prefix) out.push_back(p.get());
  }
  return out;
}

std::size_t ParamStore::num_values() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p->value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p->grad.fill(0.0);
}

std::uint64_t ParamStore::fingerprint() const { return fingerprint(""); }

std::uint64_t ParamStore::fingerprint(std::string_view prefix) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [name, p] : params_) {
    if (std::string_view(name).substr(0, prefix.size()) != prefix) continue;
    fnv_mix(h, name.data(), name.size());
    for (std::size_t d : p->value.shape()) {
      const std::uint64_t d64 = d;
      fnv_mix(h, &d64, sizeof d64);
    }
    fnv_mix(h, p->value.data(), p->value.size() * sizeof(double));
  }
  return h;
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.params_.size() != b.params_.size()) return false;
  auto ia = a.params_.begin();
  auto ib = b.params_.begin();
  for (; ia != a.params_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !(ia->second->value == ib->second->value)) return false;
  }
  return true;
}

void write_params(std::ostream& out, const ParamStore& store) {
  out.write(kMagic, 4);
  io::write_u32(out, kParamStoreVersion);
  const auto names = store.names();
  io::write_u64(out, names.size());
  for (const auto& name : names) {
    const Param& p = store.get(name);
    io::write_u32(out, static_cast<std::uint32_t>(name.size()));
    io::write_bytes(out, name);
    io::write_u32(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) io::write_u64(out, d);
    for (double v : p.value.values()) io::write_f64(out, v);
  }
  if (!out) throw IoError("failed writing parameter container");
}

ParamStore read_params(std::istream& in) {
  char magic[4];
  io::read_exact(in, magic, 4);
  if (std::string_view(magic, 4) != std::string_view(kMagic, 4)) {
    throw IoError("not a parameter container (bad magic)");
  }
  const std::uint32_t version = io::read_u32(in);
  if (version != kParamStoreVersion) {
    throw IoError("unsupported parameter container version " + std::to_string(version));
  }
  const std::uint64_t count = io::read_u64(in);
  ParamStore store;
  for (std::uint64_t e = 0; e < count; ++e) {
    const std::uint32_t name_len = io::read_u32(in);
    std::string name = io::read_string(in, name_len);
    const std::uint32_t rank = io::read_u32(in);
    Shape shape(rank);
    for (auto& d : shape) d = io::read_u64(in);
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = io::read_f64(in);
    store.add(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return store;
}

void save_params(const ParamStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_params(out, store);
}

ParamStore load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::kMissingFile, "cannot open " + path.string());
  return read_params(in);
}

}  // namespace skimnet::numerics
