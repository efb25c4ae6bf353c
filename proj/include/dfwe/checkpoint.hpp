#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dfwe/binary_io.hpp"
#include "dfwe/error.hpp"

namespace dfwe {

/// One named parameter tensor. v1 stores 32-bit IEEE floats only.
struct TensorEntry {
    std::string name;
    std::vector<std::int64_t> shape;  // nonnegative dims, row-major layout
    std::vector<float> data;

    std::int64_t element_count() const {
        std::int64_t n = 1;
        for (auto d : shape) n *= d;
        return n;
    }
};

inline std::string shape_to_string(const std::vector<std::int64_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

/// A flat map of named tensors plus free-form string metadata. Immutable by
/// convention once built; nothing here mutates a checkpoint after load/save.
struct Checkpoint {
    std::map<std::string, TensorEntry> tensors;  // keyed (and serialized) by name
    std::map<std::string, std::string> meta;

    void add_tensor(TensorEntry entry) {
        if (entry.name.empty()) throw ValidationError("tensor name must be nonempty");
        for (auto d : entry.shape) {
            if (d < 0) throw ValidationError("tensor \"" + entry.name + "\" has a negative dimension");
        }
        if (entry.element_count() != static_cast<std::int64_t>(entry.data.size())) {
            throw ValidationError("tensor \"" + entry.name + "\": shape " + shape_to_string(entry.shape) +
                                  " does not match " + std::to_string(entry.data.size()) + " elements");
        }
        std::string name = entry.name;  // evaluation order of emplace args is unspecified
        auto [it, inserted] = tensors.emplace(std::move(name), std::move(entry));
        if (!inserted) throw ValidationError("duplicate tensor name \"" + it->first + "\"");
    }

    const TensorEntry& tensor(const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw ValidationError("no tensor named \"" + name + "\"");
        return it->second;
    }

    std::int64_t parameter_count() const {
        std::int64_t n = 0;
        for (const auto& [_, t] : tensors) n += t.element_count();
        return n;
    }
};

namespace detail {

constexpr char kCheckpointMagic[4] = {'D', 'F', 'W', 'E'};
constexpr std::uint32_t kCheckpointVersion = 1;

inline void check_all_finite(const Checkpoint& c) {
    for (const auto& [name, t] : c.tensors) {
        for (float v : t.data) {
            if (!std::isfinite(v)) {
                throw ValidationError("tensor \"" + name + "\" contains a non-finite element");
            }
        }
    }
}

}  // namespace detail

/// Canonical container bytes for a checkpoint. Pure function of logical
/// content: names are serialized in sorted order, all integers little-endian,
/// header JSON emitted without whitespace.
inline std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& c) {
    detail::check_all_finite(c);

    nlohmann::ordered_json header;
    nlohmann::ordered_json tensor_list = nlohmann::ordered_json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : c.tensors) {  // std::map iterates sorted by name
        const std::uint64_t nbytes = static_cast<std::uint64_t>(t.element_count()) * 4;
        nlohmann::ordered_json rec;
        rec["name"] = name;
        rec["dtype"] = "f32";
        rec["shape"] = t.shape;
        rec["offset"] = offset;
        rec["nbytes"] = nbytes;
        tensor_list.push_back(std::move(rec));
        offset += nbytes;
    }
    header["tensors"] = std::move(tensor_list);
    header["meta"] = c.meta;

    const std::string header_str = header.dump();

    std::vector<std::uint8_t> out;
    out.reserve(16 + header_str.size() + offset);
    out.insert(out.end(), detail::kCheckpointMagic, detail::kCheckpointMagic + 4);
    append_u32(out, detail::kCheckpointVersion);
    append_u64(out, header_str.size());
    out.insert(out.end(), header_str.begin(), header_str.end());
    for (const auto& [_, t] : c.tensors) {
        for (float v : t.data) append_f32(out, v);
    }
    return out;
}

/// Parses container bytes. Header fields are validated before any tensor data
/// is interpreted; never returns a checkpoint violating type invariants.
inline Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes, bool verify_finite = false) {
    ByteReader r{bytes};
    r.require(4, "magic");
    if (std::memcmp(bytes.data(), detail::kCheckpointMagic, 4) != 0) {
        throw FormatError("bad magic bytes, not a checkpoint container");
    }
    r.pos = 4;
    const std::uint32_t version = r.read_u32("format version");
    if (version != detail::kCheckpointVersion) {
        throw FormatError("unsupported checkpoint format version " + std::to_string(version));
    }
    const std::uint64_t header_len = r.read_u64("header length");
    if (header_len > r.remaining()) {
        throw CorruptionError("header length " + std::to_string(header_len) + " exceeds file size");
    }

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
                                       bytes.begin() + static_cast<std::ptrdiff_t>(r.pos + header_len));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptionError(std::string("unparseable header JSON: ") + e.what());
    }
    r.pos += header_len;

    if (!header.is_object() || !header.contains("tensors") || !header["tensors"].is_array() ||
        !header.contains("meta") || !header["meta"].is_object()) {
        throw CorruptionError("header missing \"tensors\" array or \"meta\" object");
    }

    struct PendingTensor {
        std::string name;
        std::vector<std::int64_t> shape;
        std::uint64_t offset;
        std::uint64_t nbytes;
    };
    std::vector<PendingTensor> pending;
    std::uint64_t expected_offset = 0;
    std::string previous_name;
    for (const auto& rec : header["tensors"]) {
        if (!rec.is_object() || !rec.contains("name") || !rec.contains("dtype") || !rec.contains("shape") ||
            !rec.contains("offset") || !rec.contains("nbytes")) {
            throw CorruptionError("tensor record missing required fields");
        }
        PendingTensor t;
        t.name = rec["name"].get<std::string>();
        if (t.name.empty()) throw CorruptionError("tensor record with empty name");
        if (!previous_name.empty() && !(previous_name < t.name)) {
            throw CorruptionError("tensor names not in sorted order: \"" + previous_name + "\" before \"" +
                                  t.name + "\"");
        }
        previous_name = t.name;
        if (rec["dtype"].get<std::string>() != "f32") {
            throw CorruptionError("tensor \"" + t.name + "\" has unsupported dtype \"" +
                                  rec["dtype"].get<std::string>() + "\"");
        }
        t.shape = rec["shape"].get<std::vector<std::int64_t>>();
        std::int64_t elements = 1;
        for (auto d : t.shape) {
            if (d < 0) throw CorruptionError("tensor \"" + t.name + "\" has a negative dimension");
            elements *= d;
        }
        t.offset = rec["offset"].get<std::uint64_t>();
        t.nbytes = rec["nbytes"].get<std::uint64_t>();
        if (t.nbytes != static_cast<std::uint64_t>(elements) * 4) {
            throw CorruptionError("tensor \"" + t.name + "\": nbytes does not match shape");
        }
        if (t.offset != expected_offset) {
            throw CorruptionError("tensor \"" + t.name + "\": offset " + std::to_string(t.offset) +
                                  " breaks the contiguous data layout");
        }
        expected_offset += t.nbytes;
        pending.push_back(std::move(t));
    }

    if (r.remaining() != expected_offset) {
        throw CorruptionError("data section is " + std::to_string(r.remaining()) + " bytes, header declares " +
                              std::to_string(expected_offset));
    }

    Checkpoint c;
    for (auto& t : pending) {
        TensorEntry entry;
        entry.name = std::move(t.name);
        entry.shape = std::move(t.shape);
        entry.data.resize(t.nbytes / 4);
        for (auto& v : entry.data) v = r.read_f32("tensor data");
        c.add_tensor(std::move(entry));
    }
    for (const auto& [key, value] : header["meta"].items()) {
        if (!value.is_string()) throw CorruptionError("meta value for \"" + key + "\" is not a string");
        c.meta[key] = value.get<std::string>();
    }

    if (verify_finite) detail::check_all_finite(c);
    return c;
}

inline void save(const Checkpoint& c, const std::filesystem::path& path) {
    write_file_bytes(path, serialize_checkpoint(c));
}

/// Loads a checkpoint. Finite-value scanning is off by default (save already
/// enforces it); pass verify=true for files from other writers.
inline Checkpoint load(const std::filesystem::path& path, bool verify = false) {
    return deserialize_checkpoint(read_file_bytes(path), verify);
}

/// An ordered, architecture-compatible collection of checkpoints.
struct CheckpointSet {
    std::vector<Checkpoint> members;
    std::vector<std::string> labels;

    std::size_t size() const { return members.size(); }
};

namespace detail {

/// Throws CompatibilityError on the first structural mismatch between the
/// reference checkpoint and member `index`.
inline void check_member_compatible(const Checkpoint& reference, const Checkpoint& candidate, std::size_t index) {
    for (const auto& [name, t] : reference.tensors) {
        auto it = candidate.tensors.find(name);
        if (it == candidate.tensors.end()) {
            throw CompatibilityError(index, name, "tensor present", "missing");
        }
        if (it->second.shape != t.shape) {
            throw CompatibilityError(index, name, "shape " + shape_to_string(t.shape),
                                     "shape " + shape_to_string(it->second.shape));
        }
    }
    for (const auto& [name, _] : candidate.tensors) {
        if (reference.tensors.find(name) == reference.tensors.end()) {
            throw CompatibilityError(index, name, "tensor absent", "present");
        }
    }
}

}  // namespace detail

/// Validates that every member shares the reference architecture (identical
/// name sets, shapes and dtypes) and returns them as a set. Labels default to
/// each member's "label" meta entry, else its index.
inline CheckpointSet check_compatible(std::vector<Checkpoint> members, std::vector<std::string> labels = {}) {
    if (members.size() < 2) {
        throw ValidationError("a checkpoint set needs at least 2 members, got " + std::to_string(members.size()));
    }
    for (std::size_t i = 1; i < members.size(); ++i) {
        detail::check_member_compatible(members[0], members[i], i);
    }
    if (labels.empty()) {
        labels.reserve(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            auto it = members[i].meta.find("label");
            labels.push_back(it != members[i].meta.end() ? it->second : std::to_string(i));
        }
    }
    if (labels.size() != members.size()) {
        throw ValidationError("label count does not match member count");
    }
    return CheckpointSet{std::move(members), std::move(labels)};
}

}  // namespace dfwe
