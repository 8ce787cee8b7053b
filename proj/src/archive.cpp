#include "nhrmt/archive.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <json.hpp>

#include "json_convert.hpp"
#include "nhrmt/errors.hpp"

namespace nhrmt {

namespace {

constexpr const char* kFormat = "nhrmt-eigen-archive";
constexpr std::size_t kMaxHeaderBytes = std::size_t{1} << 24;

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(sizeof(T) == 8);
    unsigned char b[8];
    std::memcpy(b, &value, 8);
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
    out.write(reinterpret_cast<const char*>(b), 8);
}

template <class T>
T get_le(const unsigned char* b) {
    unsigned char c[8];
    std::memcpy(c, b, 8);
    if constexpr (std::endian::native == std::endian::big) std::reverse(c, c + 8);
    T value;
    std::memcpy(&value, c, 8);
    return value;
}

std::string header_text(const ArchiveHeader& h) {
    nlohmann::json j{{"format", kFormat},
                     {"version", h.version},
                     {"endianness", "little"},
                     {"samples", h.samples},
                     {"points", h.points},
                     {"degeneracy_collapsed", h.degeneracy_collapsed}};
    j["ensemble"] = h.ensemble ? detail::ensemble_to_json(*h.ensemble) : nlohmann::json(nullptr);
    j["config"] = nlohmann::json::parse(h.config_json, nullptr, false);
    if (j["config"].is_discarded()) throw ConfigError("archive: config echo is not valid JSON");
    return j.dump();
}

ArchiveHeader parse_header(const std::string& line) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw CorruptArchiveError("archive header is not a JSON object", 0);
    ArchiveHeader h;
    try {
        if (j.at("format").get<std::string>() != kFormat) throw CorruptArchiveError("not an eigenvalue archive", 0);
        if (j.at("endianness").get<std::string>() != "little")
            throw CorruptArchiveError("unsupported endianness marker", 0);
        h.version = j.at("version").get<int>();
        if (h.version != kArchiveVersion)
            throw CorruptArchiveError("unsupported archive version " + std::to_string(h.version), 0);
        h.samples = j.at("samples").get<std::uint64_t>();
        h.points = j.at("points").get<std::uint64_t>();
        h.degeneracy_collapsed = j.value("degeneracy_collapsed", false);
        if (j.contains("ensemble") && !j["ensemble"].is_null()) h.ensemble = detail::ensemble_from_json(j["ensemble"]);
        h.config_json = j.value("config", nlohmann::json::object()).dump();
    } catch (const nlohmann::json::exception& ex) {
        throw CorruptArchiveError(std::string("archive header: ") + ex.what(), 0);
    } catch (const ConfigError& ex) {
        throw CorruptArchiveError(ex.what(), 0);
    }
    return h;
}

}  // namespace

ArchiveWriter::ArchiveWriter(const std::filesystem::path& path, std::optional<EnsembleSpec> ensemble,
                             const std::string& config_json)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open archive for writing: " + path.string());
    header_.ensemble = ensemble;
    header_.config_json = config_json;
    // Room for the counts to grow when the header is rewritten on close.
    header_width_ = header_text(header_).size() + 64;
    out_ << std::string(header_width_, ' ') << '\n';
}

ArchiveWriter::~ArchiveWriter() {
    try {
        close();
    } catch (...) {
    }
}

void ArchiveWriter::append(const Spectrum& s) {
    if (!out_.is_open()) throw IoError("archive already closed: " + path_.string());
    if (!collapsed_set_) {
        header_.degeneracy_collapsed = s.degeneracy_collapsed;
        collapsed_set_ = true;
    } else if (header_.degeneracy_collapsed != s.degeneracy_collapsed) {
        throw ConfigError("archive: mixed collapsed and uncollapsed spectra");
    }
    put_le<std::uint64_t>(out_, s.eigenvalues.size());
    for (const auto& z : s.eigenvalues) {
        put_le<double>(out_, z.real());
        put_le<double>(out_, z.imag());
    }
    ++header_.samples;
    header_.points += s.eigenvalues.size();
    if (!out_) throw IoError("write failed: " + path_.string());
}

void ArchiveWriter::close() {
    if (!out_.is_open()) return;
    std::string text = header_text(header_);
    text.resize(header_width_, ' ');
    out_.seekp(0);
    out_ << text;
    out_.close();
    if (out_.fail()) throw IoError("write failed: " + path_.string());
}

ArchiveReader::ArchiveReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open archive: " + path.string());
    std::error_code ec;
    file_size_ = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat archive: " + path.string());
    std::string line;
    char c;
    while (in_.get(c)) {
        if (c == '\n') break;
        line.push_back(c);
        if (line.size() > kMaxHeaderBytes) throw CorruptArchiveError("archive header line too long", 0);
    }
    if (c != '\n' || !in_) throw CorruptArchiveError("archive header line is not terminated", line.size());
    header_ = parse_header(line);
    offset_ = line.size() + 1;
}

std::optional<Spectrum> ArchiveReader::next() {
    if (read_samples_ == header_.samples) {
        if (offset_ != file_size_) throw CorruptArchiveError("trailing bytes after the last sample", offset_);
        if (read_points_ != header_.points)
            throw CorruptArchiveError("point count disagrees with the header", offset_);
        return std::nullopt;
    }
    unsigned char prefix[8];
    if (file_size_ - offset_ < 8) throw CorruptArchiveError("truncated sample length prefix", offset_);
    in_.read(reinterpret_cast<char*>(prefix), 8);
    const auto count = get_le<std::uint64_t>(prefix);
    const std::uint64_t avail = file_size_ - offset_ - 8;
    if (count > avail / 16) throw CorruptArchiveError("sample length prefix exceeds the remaining payload", offset_);
    std::vector<unsigned char> buf(count * 16);
    in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in_) throw CorruptArchiveError("read failed inside sample payload", offset_ + 8);
    Spectrum s;
    s.eigenvalues.resize(count);
    for (std::uint64_t i = 0; i < count; ++i)
        s.eigenvalues[i] = {get_le<double>(&buf[16 * i]), get_le<double>(&buf[16 * i + 8])};
    if (header_.ensemble) {
        s.spec = *header_.ensemble;
        s.spec.sample_index = read_samples_;
    }
    s.degeneracy_collapsed = header_.degeneracy_collapsed;
    offset_ += 8 + count * 16;
    ++read_samples_;
    read_points_ += count;
    return s;
}

void save_archive(std::span<const Spectrum> spectra, const std::filesystem::path& path,
                  const std::string& config_json) {
    std::optional<EnsembleSpec> ensemble;
    if (!spectra.empty()) ensemble = spectra.front().spec;
    ArchiveWriter w(path, ensemble, config_json);
    for (const auto& s : spectra) w.append(s);
    w.close();
}

std::vector<Spectrum> load_archive(const std::filesystem::path& path) {
    ArchiveReader r(path);
    std::vector<Spectrum> out;
    while (auto s = r.next()) out.push_back(std::move(*s));
    return out;
}

ArchiveHeader read_archive_header(const std::filesystem::path& path) { return ArchiveReader(path).header(); }

}  // namespace nhrmt
