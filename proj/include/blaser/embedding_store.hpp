#pragma once

// Embedding files, dataset manifests, and validated evaluation datasets.
//
// Embedding file layout (all little-endian):
//   "BLSE" | u16 version=1 | u32 dim | u64 count | count*dim f32, row-major
//
// Manifest: UTF-8 JSON Lines, one instance per line:
//   {"id": "...",
//    "src": {"file": "a.blse", "row": 0, "modality": "speech", "lang": "es"},
//    "mt":  {...}, "ref": {...},
//    "ratings": [3, 4.5], "system_id": "...", "split": "train" | "test"}
// Relative embedding file paths resolve against the manifest's directory.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blaser {

enum class Modality : std::uint8_t { kSpeech, kText };
enum class Split : std::uint8_t { kTrain, kTest };

std::string_view to_string(Modality m);
std::string_view to_string(Split s);
std::optional<Modality> parse_modality(std::string_view s);
std::optional<Split> parse_split(std::string_view s);

// (source, translation, reference) modalities.
struct ModalityCombo {
  Modality src = Modality::kSpeech;
  Modality mt = Modality::kSpeech;
  Modality ref = Modality::kSpeech;

  friend bool operator==(const ModalityCombo&, const ModalityCombo&) = default;
  friend auto operator<=>(const ModalityCombo&, const ModalityCombo&) = default;
};

// "speech,speech,text" style. Also accepts the single-letter "sst" form.
std::optional<ModalityCombo> parse_combo(std::string_view s);
std::string to_string(const ModalityCombo& c);

// The four (src, mt, ref) settings compared in the modality ablation.
inline constexpr std::array<ModalityCombo, 4> kAblationCombos{{
    {Modality::kSpeech, Modality::kSpeech, Modality::kSpeech},
    {Modality::kSpeech, Modality::kSpeech, Modality::kText},
    {Modality::kSpeech, Modality::kText, Modality::kText},
    {Modality::kText, Modality::kText, Modality::kText},
}};

inline constexpr std::uint16_t kEmbeddingFileVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 4 + 2 + 4 + 8;

// Dense row-major block of embeddings sharing one dimension.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::uint32_t dim, std::vector<float> data);

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::span<const float> row(std::size_t i) const;
  std::span<const float> data() const noexcept { return data_; }
  std::vector<std::vector<float>> rows() const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::uint32_t dim_ = 0;
  std::vector<float> data_;
};

// Throws DimensionError on a row-length mismatch, Error on a non-finite value
// or dim == 0, FormatError(kIo) if the file cannot be written.
void write_embeddings(const std::vector<std::vector<float>>& rows, std::uint32_t dim,
                      const std::filesystem::path& path);
void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);

std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& m);
EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes);

// Throws FormatError with kBadMagic, kUnsupportedVersion, kTruncated, kCorrupt
// (trailing bytes, non-finite values) or kIo.
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

struct EmbeddingRef {
  std::string file;
  std::uint64_t row = 0;
  Modality modality = Modality::kSpeech;
  std::string lang;

  friend bool operator==(const EmbeddingRef&, const EmbeddingRef&) = default;
};

struct EvalInstance {
  std::string id;
  EmbeddingRef src;
  EmbeddingRef mt;
  EmbeddingRef ref;
  std::vector<double> ratings;  // raw annotations, each in [1, 5]
  std::string system_id;
  Split split = Split::kTest;

  std::pair<std::string, std::string> lang_pair() const { return {src.lang, mt.lang}; }
  ModalityCombo combo() const { return {src.modality, mt.modality, ref.modality}; }

  friend bool operator==(const EvalInstance&, const EvalInstance&) = default;
};

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 5.0;

// Embedding vectors of one instance, viewing storage owned by the Dataset.
struct TripleView {
  std::span<const float> src;
  std::span<const float> mt;
  std::span<const float> ref;
};

// Immutable, validated collection of instances plus the embedding tables they
// reference. Copies share the tables.
class Dataset {
 public:
  using TableMap = std::map<std::string, std::shared_ptr<const EmbeddingMatrix>>;

  Dataset() = default;

  // Validates every invariant; throws ValidationError naming the instance.
  Dataset(std::vector<EvalInstance> instances, TableMap tables, std::string manifest_path = {});

  const std::vector<EvalInstance>& instances() const noexcept { return instances_; }
  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  // 0 for a dataset with no instances.
  std::uint32_t dim() const noexcept { return dim_; }
  const std::string& manifest_path() const noexcept { return manifest_path_; }
  const TableMap& tables() const noexcept { return tables_; }

  TripleView triple(std::size_t i) const { return views_.at(i); }

  // Subset in original order; keeps the table map.
  template <typename Pred>
  Dataset filter(Pred&& keep) const {
    Dataset out;
    out.tables_ = tables_;
    out.manifest_path_ = manifest_path_;
    out.dim_ = 0;
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      if (keep(instances_[i])) {
        out.instances_.push_back(instances_[i]);
        out.views_.push_back(views_[i]);
        out.dim_ = dim_;
      }
    }
    return out;
  }

 private:
  std::vector<EvalInstance> instances_;
  std::vector<TripleView> views_;
  TableMap tables_;
  std::uint32_t dim_ = 0;
  std::string manifest_path_;
};

Dataset load_dataset(const std::filesystem::path& manifest_path);

// Parses one manifest record; `line_no` is only used in error messages.
EvalInstance parse_manifest_line(std::string_view line, std::size_t line_no = 0);
std::string format_manifest_line(const EvalInstance& inst);
void write_manifest(std::span<const EvalInstance> instances, const std::filesystem::path& path);

Dataset filter_by_modality(const Dataset& ds, const ModalityCombo& combo);
Dataset filter_by_split(const Dataset& ds, Split split);

}  // namespace blaser
