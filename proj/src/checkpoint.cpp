// Copyright 2026-present the fercnn project
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

#include "fer/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <vector>

#include "fer/error.hpp"

namespace fer {

namespace {

class Writer {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    template <typename U>
    void uint(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void text16(const std::string& s) {
        uint<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void text32(const std::string& s) {
        uint<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    std::vector<std::uint8_t>& buffer() { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    Reader(const std::uint8_t* data, std::size_t size, std::string source)
        : data_(data), size_(size), source_(std::move(source)) {}

    void need(std::size_t n, const char* what) {
        if (size_ - pos_ < n) {
            throw CheckpointError(source_ + ": truncated while reading " + what);
        }
    }
    template <typename U>
    U uint(const char* what) {
        need(sizeof(U), what);
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(U{data_[pos_ + i]} << (8 * i));
        pos_ += sizeof(U);
        return v;
    }
    std::string text(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    float f32() { return std::bit_cast<float>(uint<std::uint32_t>("parameter values")); }
    [[nodiscard]] std::size_t remaining() const { return size_ - pos_; }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
    std::string source_;
};

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    while (n > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        crc = crc32(crc, data, chunk);
        data += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

// First line where two fingerprints differ, for the error message.
std::string first_difference(const std::string& a, const std::string& b) {
    std::size_t pa = 0, pb = 0;
    while (pa < a.size() || pb < b.size()) {
        const std::size_t ea = std::min(a.find('\n', pa), a.size());
        const std::size_t eb = std::min(b.find('\n', pb), b.size());
        const std::string la = a.substr(pa, ea - pa), lb = b.substr(pb, eb - pb);
        if (la != lb) return "file has \"" + la + "\", model expects \"" + lb + "\"";
        pa = ea + 1;
        pb = eb + 1;
    }
    return "fingerprints differ";
}

template <typename T>
struct NamedTensor {
    std::string name;
    Tensor<T>* value;
};

template <typename T>
std::vector<NamedTensor<T>> stored_tensors(FerModel<T>& model) {
    std::vector<NamedTensor<T>> out;
    for (auto& p : model.params()) out.push_back({p.name, p.value});
    for (auto& b : model.buffers()) out.push_back({b.name, b.value});
    return out;
}

}  // namespace

template <typename T>
void save_checkpoint(FerModel<T>& model, const std::filesystem::path& path,
                     const CheckpointMeta& meta) {
    Writer w;
    w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
    w.uint<std::uint16_t>(kCheckpointVersion);
    w.text32(model.fingerprint());
    w.uint<std::uint32_t>(meta.epoch);
    w.uint<std::uint64_t>(meta.seed);

    const auto tensors = stored_tensors(model);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        w.text16(t.name);
        w.uint<std::uint8_t>(static_cast<std::uint8_t>(t.value->rank()));
        for (std::size_t d : t.value->shape()) w.uint<std::uint32_t>(static_cast<std::uint32_t>(d));
        for (T v : t.value->values()) w.uint<std::uint32_t>(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    auto& buf = w.buffer();
    w.uint<std::uint32_t>(crc32_of(buf.data(), buf.size()));

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write checkpoint " + tmp.string());
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out) throw DataError("failed writing checkpoint " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

template <typename T>
FerModel<T> load_checkpoint(const std::filesystem::path& path, const ArchConfig& arch,
                            CheckpointMeta* meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    const std::string source = path.string();

    if (bytes.size() < sizeof kCheckpointMagic ||
        std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
        throw CheckpointError(source + ": bad magic, not a checkpoint file");
    }
    if (bytes.size() < sizeof kCheckpointMagic + 2 + 4) {
        throw CheckpointError(source + ": truncated header");
    }
    const std::size_t body = bytes.size() - 4;
    Reader trailer(bytes.data() + body, 4, source);
    if (crc32_of(bytes.data(), body) != trailer.uint<std::uint32_t>("checksum")) {
        throw CheckpointError(source + ": checksum mismatch (file is truncated or corrupted)");
    }

    Reader r(bytes.data(), body, source);
    r.text(sizeof kCheckpointMagic, "magic");
    const auto version = r.uint<std::uint16_t>("version");
    if (version != kCheckpointVersion) {
        throw CheckpointError(source + ": unsupported checkpoint version " + std::to_string(version));
    }

    FerModel<T> model(arch, 0);
    const auto fp_len = r.uint<std::uint32_t>("fingerprint length");
    const std::string fingerprint = r.text(fp_len, "fingerprint");
    if (fingerprint != model.fingerprint()) {
        throw CheckpointError(source + ": architecture fingerprint mismatch: " +
                              first_difference(fingerprint, model.fingerprint()));
    }
    CheckpointMeta stored;
    stored.epoch = r.uint<std::uint32_t>("epoch");
    stored.seed = r.uint<std::uint64_t>("seed");

    auto tensors = stored_tensors(model);
    std::map<std::string, Tensor<T>*> by_name;
    for (auto& t : tensors) by_name.emplace(t.name, t.value);

    const auto count = r.uint<std::uint32_t>("block count");
    if (count != tensors.size()) {
        throw CheckpointError(source + ": holds " + std::to_string(count) + " tensors, model has " +
                              std::to_string(tensors.size()));
    }
    for (std::uint32_t b = 0; b < count; ++b) {
        const std::string name = r.text(r.uint<std::uint16_t>("name length"), "name");
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw CheckpointError(source + ": unknown tensor \"" + name + "\"");
        Tensor<T>& target = *it->second;
        by_name.erase(it);

        Shape shape(r.uint<std::uint8_t>("rank"));
        for (auto& d : shape) d = r.uint<std::uint32_t>("dimension");
        if (shape != target.shape()) {
            throw CheckpointError(source + ": tensor \"" + name + "\" has shape " + to_string(shape) +
                                  ", model expects " + to_string(target.shape()));
        }
        r.need(target.size() * 4, "parameter values");
        for (auto& v : target.values()) v = static_cast<T>(r.f32());
    }
    if (r.remaining() != 0) throw CheckpointError(source + ": trailing bytes after the last tensor");
    if (meta != nullptr) *meta = stored;
    return model;
}

template void save_checkpoint(FerModel<float>&, const std::filesystem::path&, const CheckpointMeta&);
template void save_checkpoint(FerModel<double>&, const std::filesystem::path&, const CheckpointMeta&);
template FerModel<float> load_checkpoint(const std::filesystem::path&, const ArchConfig&, CheckpointMeta*);
template FerModel<double> load_checkpoint(const std::filesystem::path&, const ArchConfig&, CheckpointMeta*);

}  // namespace fer
