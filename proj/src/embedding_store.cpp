#include "blaser/embedding_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "blaser/error.hpp"
#include "byte_io.hpp"

namespace blaser {

namespace detail {

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(FormatError::Kind::kIo, "cannot open '" + path.string() + "' for reading");
  }
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw FormatError(FormatError::Kind::kIo, "read failed on '" + path.string() + "'");
  }
  std::vector<std::byte> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(), [](char c) { return static_cast<std::byte>(c); });
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError(FormatError::Kind::kIo, "cannot open '" + path.string() + "' for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    throw FormatError(FormatError::Kind::kIo, "write failed on '" + path.string() + "'");
  }
}

}  // namespace detail

namespace {

constexpr std::string_view kMagic = "BLSE";

}  // namespace

std::string_view to_string(Modality m) { return m == Modality::kSpeech ? "speech" : "text"; }
std::string_view to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "speech") return Modality::kSpeech;
  if (s == "text") return Modality::kText;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

std::optional<ModalityCombo> parse_combo(std::string_view s) {
  auto letter = [](char c) -> std::optional<Modality> {
    if (c == 's') return Modality::kSpeech;
    if (c == 't') return Modality::kText;
    return std::nullopt;
  };
  if (s.size() == 3) {
    auto a = letter(s[0]), b = letter(s[1]), c = letter(s[2]);
    if (a && b && c) return ModalityCombo{*a, *b, *c};
    return std::nullopt;
  }
  std::array<Modality, 3> parts{};
  std::size_t start = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t comma = s.find(',', start);
    if ((k < 2) != (comma != std::string_view::npos)) return std::nullopt;
    auto m = parse_modality(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!m) return std::nullopt;
    parts[k] = *m;
    start = comma + 1;
  }
  return ModalityCombo{parts[0], parts[1], parts[2]};
}

std::string to_string(const ModalityCombo& c) {
  std::string out;
  out += to_string(c.src);
  out += ',';
  out += to_string(c.mt);
  out += ',';
  out += to_string(c.ref);
  return out;
}

EmbeddingMatrix::EmbeddingMatrix(std::uint32_t dim, std::vector<float> data)
    : dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw DimensionError("embedding dim must be positive");
  if (data_.size() % dim_ != 0) {
    throw DimensionError("embedding data size " + std::to_string(data_.size()) +
                         " is not a multiple of dim " + std::to_string(dim_));
  }
}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
  if (i >= count()) {
    throw std::out_of_range("embedding row " + std::to_string(i) + " out of range");
  }
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::vector<std::vector<float>> EmbeddingMatrix::rows() const {
  std::vector<std::vector<float>> out;
  out.reserve(count());
  for (std::size_t i = 0; i < count(); ++i) {
    auto r = row(i);
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& m) {
  if (m.dim() == 0) throw DimensionError("embedding dim must be positive");
  for (float v : m.data()) {
    if (!std::isfinite(v)) throw Error("non-finite value in embedding data");
  }
  detail::ByteWriter w;
  w.reserve(kEmbeddingHeaderBytes + m.data().size() * 4);
  w.magic(kMagic);
  w.u16(kEmbeddingFileVersion);
  w.u32(m.dim());
  w.u64(m.count());
  for (float v : m.data()) w.f32(v);
  return std::move(w.bytes());
}

EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes) {
  detail::ByteReader r(bytes, "embedding file");
  r.expect_magic(kMagic);
  const std::uint16_t version = r.u16();
  if (version != kEmbeddingFileVersion) {
    throw FormatError(FormatError::Kind::kUnsupportedVersion,
                      "embedding file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t dim = r.u32();
  const std::uint64_t count = r.u64();
  if (dim == 0) throw FormatError(FormatError::Kind::kCorrupt, "embedding file: dim is 0");
  // count <= remaining / (4 * dim) keeps count * dim * 4 from overflowing.
  if (count > r.remaining() / (4 * std::uint64_t{dim})) {
    throw FormatError(FormatError::Kind::kTruncated,
                      "embedding file: truncated payload, header declares " + std::to_string(count) +
                          " rows of dim " + std::to_string(dim) + " but only " +
                          std::to_string(r.remaining()) + " payload bytes remain");
  }
  const std::uint64_t n = count * dim;
  std::vector<float> data(n);
  for (auto& v : data) {
    v = r.f32();
    if (!std::isfinite(v)) {
      throw FormatError(FormatError::Kind::kCorrupt, "embedding file: non-finite value");
    }
  }
  if (r.remaining() != 0) {
    throw FormatError(FormatError::Kind::kCorrupt,
                      "embedding file: " + std::to_string(r.remaining()) + " trailing bytes");
  }
  return EmbeddingMatrix(dim, std::move(data));
}

void write_embeddings(const std::vector<std::vector<float>>& rows, std::uint32_t dim,
                      const std::filesystem::path& path) {
  if (dim == 0) throw DimensionError("embedding dim must be positive");
  std::vector<float> flat;
  flat.reserve(rows.size() * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw DimensionError("row " + std::to_string(i) + " has length " +
                           std::to_string(rows[i].size()) + ", expected " + std::to_string(dim));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  write_embeddings(EmbeddingMatrix(dim, std::move(flat)), path);
}

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  detail::write_file(path, encode_embeddings(m));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_embeddings(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

using nlohmann::json;

EmbeddingRef parse_ref(const json& j, const std::string& id, std::string_view role) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError(id, std::string(role) + ": " + msg);
  };
  if (!j.is_object()) fail("expected an object");
  EmbeddingRef r;
  if (!j.contains("file") || !j["file"].is_string()) fail("missing string field 'file'");
  r.file = j["file"].get<std::string>();
  if (!j.contains("row") || !j["row"].is_number_unsigned()) fail("missing non-negative 'row'");
  r.row = j["row"].get<std::uint64_t>();
  if (!j.contains("modality") || !j["modality"].is_string()) fail("missing 'modality'");
  auto m = parse_modality(j["modality"].get<std::string>());
  if (!m) fail("unknown modality '" + j["modality"].get<std::string>() + "'");
  r.modality = *m;
  if (j.contains("lang")) {
    if (!j["lang"].is_string()) fail("'lang' must be a string");
    r.lang = j["lang"].get<std::string>();
  }
  return r;
}

json ref_to_json(const EmbeddingRef& r) {
  return json{{"file", r.file}, {"row", r.row}, {"modality", to_string(r.modality)}, {"lang", r.lang}};
}

}  // namespace

EvalInstance parse_manifest_line(std::string_view line, std::size_t line_no) {
  const std::string where = "manifest line " + std::to_string(line_no);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError("", where + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("", where + ": expected a JSON object");
  if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
    throw ValidationError("", where + ": missing non-empty string 'id'");
  }
  EvalInstance inst;
  inst.id = j["id"].get<std::string>();
  for (auto [key, dst] : {std::pair{"src", &inst.src}, {"mt", &inst.mt}, {"ref", &inst.ref}}) {
    if (!j.contains(key)) throw ValidationError(inst.id, std::string("missing '") + key + "'");
    *dst = parse_ref(j[key], inst.id, key);
  }
  if (j.contains("ratings")) {
    if (!j["ratings"].is_array()) throw ValidationError(inst.id, "'ratings' must be an array");
    for (const auto& r : j["ratings"]) {
      if (!r.is_number()) throw ValidationError(inst.id, "non-numeric rating");
      inst.ratings.push_back(r.get<double>());
    }
  }
  if (j.contains("system_id")) {
    if (!j["system_id"].is_string()) throw ValidationError(inst.id, "'system_id' must be a string");
    inst.system_id = j["system_id"].get<std::string>();
  }
  if (!j.contains("split") || !j["split"].is_string()) {
    throw ValidationError(inst.id, "missing 'split'");
  }
  auto split = parse_split(j["split"].get<std::string>());
  if (!split) throw ValidationError(inst.id, "unknown split '" + j["split"].get<std::string>() + "'");
  inst.split = *split;
  return inst;
}

std::string format_manifest_line(const EvalInstance& inst) {
  json j;
  j["id"] = inst.id;
  j["src"] = ref_to_json(inst.src);
  j["mt"] = ref_to_json(inst.mt);
  j["ref"] = ref_to_json(inst.ref);
  j["ratings"] = inst.ratings;
  j["system_id"] = inst.system_id;
  j["split"] = to_string(inst.split);
  return j.dump();
}

void write_manifest(std::span<const EvalInstance> instances, const std::filesystem::path& path) {
  std::string text;
  for (const auto& inst : instances) {
    text += format_manifest_line(inst);
    text += '\n';
  }
  detail::write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

Dataset::Dataset(std::vector<EvalInstance> instances, TableMap tables, std::string manifest_path)
    : instances_(std::move(instances)), tables_(std::move(tables)), manifest_path_(std::move(manifest_path)) {
  std::unordered_map<std::string, Split> seen;
  views_.reserve(instances_.size());
  std::optional<std::uint32_t> dim;
  for (const auto& inst : instances_) {
    if (auto it = seen.find(inst.id); it != seen.end()) {
      if (it->second != inst.split) {
        throw ValidationError(inst.id, "id present in both train and test splits");
      }
      throw ValidationError(inst.id, "duplicate instance id");
    }
    seen.emplace(inst.id, inst.split);

    for (double r : inst.ratings) {
      if (!std::isfinite(r) || r < kMinRating || r > kMaxRating) {
        std::ostringstream msg;
        msg << "rating " << r << " outside [" << kMinRating << ", " << kMaxRating << "]";
        throw ValidationError(inst.id, msg.str());
      }
    }

    auto resolve = [&](const EmbeddingRef& ref, std::string_view role) {
      auto it = tables_.find(ref.file);
      if (it == tables_.end() || !it->second) {
        throw ValidationError(inst.id, std::string(role) + ": unknown embedding file '" + ref.file + "'");
      }
      const EmbeddingMatrix& m = *it->second;
      if (ref.row >= m.count()) {
        throw ValidationError(inst.id, std::string(role) + ": row " + std::to_string(ref.row) +
                                           " out of range for '" + ref.file + "' with " +
                                           std::to_string(m.count()) + " rows");
      }
      if (dim && *dim != m.dim()) {
        throw ValidationError(inst.id, std::string(role) + ": dim " + std::to_string(m.dim()) +
                                           " of '" + ref.file + "' differs from dataset dim " +
                                           std::to_string(*dim));
      }
      dim = m.dim();
      return m.row(ref.row);
    };
    TripleView v;
    v.src = resolve(inst.src, "src");
    v.mt = resolve(inst.mt, "mt");
    v.ref = resolve(inst.ref, "ref");
    views_.push_back(v);
  }
  dim_ = dim.value_or(0);
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw FormatError(FormatError::Kind::kIo, "cannot open manifest '" + manifest_path.string() + "'");
  }
  const auto base = manifest_path.parent_path();
  std::vector<EvalInstance> instances;
  Dataset::TableMap tables;
  std::set<std::string> missing;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    EvalInstance inst = parse_manifest_line(line, line_no);
    for (const EmbeddingRef* ref : {&inst.src, &inst.mt, &inst.ref}) {
      if (tables.contains(ref->file)) continue;
      const std::filesystem::path file = std::filesystem::path(ref->file).is_absolute()
                                             ? std::filesystem::path(ref->file)
                                             : base / ref->file;
      if (!std::filesystem::exists(file)) {
        throw ValidationError(inst.id, "embedding file '" + ref->file + "' not found");
      }
      tables.emplace(ref->file, std::make_shared<const EmbeddingMatrix>(read_embeddings(file)));
    }
    instances.push_back(std::move(inst));
  }
  return Dataset(std::move(instances), std::move(tables), manifest_path.string());
}

Dataset filter_by_modality(const Dataset& ds, const ModalityCombo& combo) {
  return ds.filter([&](const EvalInstance& inst) { return inst.combo() == combo; });
}

Dataset filter_by_split(const Dataset& ds, Split split) {
  return ds.filter([&](const EvalInstance& inst) { return inst.split == split; });
}

}  // namespace blaser
