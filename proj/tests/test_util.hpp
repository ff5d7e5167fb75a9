#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <unistd.h>

#include "blaser/embedding_store.hpp"
#include "blaser/rng.hpp"

namespace blaser::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("blaser_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<std::byte> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<std::byte>(raw[i]);
  return out;
}

inline void spit(const std::filesystem::path& p, const std::vector<std::byte>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void spit_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::trunc) << text;
}

inline std::vector<float> random_vec(Engine& eng, std::size_t d, double scale = 1.0) {
  std::vector<float> v(d);
  for (auto& x : v) x = static_cast<float>(scale * standard_normal(eng));
  return v;
}

// Builds an in-memory Dataset: every triple stores its three rows in one
// table named "mem".
class DatasetBuilder {
 public:
  explicit DatasetBuilder(std::uint32_t dim) : dim_(dim) {}

  DatasetBuilder& add(std::string id, const std::vector<float>& src, const std::vector<float>& mt,
                      const std::vector<float>& ref, std::vector<double> ratings = {3.0},
                      Split split = Split::kTest, ModalityCombo combo = {}) {
    EvalInstance inst;
    inst.id = std::move(id);
    inst.split = split;
    inst.ratings = std::move(ratings);
    inst.src = {"mem", push(src), combo.src, "es"};
    inst.mt = {"mem", push(mt), combo.mt, "en"};
    inst.ref = {"mem", push(ref), combo.ref, "en"};
    instances_.push_back(std::move(inst));
    return *this;
  }

  Dataset build() const {
    Dataset::TableMap tables;
    tables["mem"] = std::make_shared<const EmbeddingMatrix>(dim_, data_);
    return Dataset(instances_, tables, "<memory>");
  }

 private:
  std::uint64_t push(const std::vector<float>& v) {
    data_.insert(data_.end(), v.begin(), v.end());
    return data_.size() / dim_ - 1;
  }

  std::uint32_t dim_;
  std::vector<float> data_;
  std::vector<EvalInstance> instances_;
};

}  // namespace blaser::testing
