#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nhrmt/ensembles.hpp"

namespace nhrmt {

inline constexpr int kArchiveVersion = 1;

// First line of an eigenvalue archive. The payload that follows holds, per
// sample, a u64 point count and then (re, im) f64 pairs, all little-endian.
struct ArchiveHeader {
    int version = kArchiveVersion;
    std::uint64_t samples = 0;
    std::uint64_t points = 0;
    bool degeneracy_collapsed = false;
    std::optional<EnsembleSpec> ensemble;  // sample_index is the position in the file
    std::string config_json = "{}";        // free-form config echo
};

void save_archive(std::span<const Spectrum> spectra, const std::filesystem::path& path,
                  const std::string& config_json = "{}");
std::vector<Spectrum> load_archive(const std::filesystem::path& path);
ArchiveHeader read_archive_header(const std::filesystem::path& path);

// Appends spectra in order; the header is rewritten with the final counts on
// close(). Not thread-safe.
class ArchiveWriter {
public:
    ArchiveWriter(const std::filesystem::path& path, std::optional<EnsembleSpec> ensemble,
                  const std::string& config_json = "{}");
    ~ArchiveWriter();
    ArchiveWriter(const ArchiveWriter&) = delete;
    ArchiveWriter& operator=(const ArchiveWriter&) = delete;

    void append(const Spectrum& s);
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    ArchiveHeader header_;
    bool collapsed_set_ = false;
    std::size_t header_width_ = 0;
};

// Sequential reader that validates prefixes as it goes.
class ArchiveReader {
public:
    explicit ArchiveReader(const std::filesystem::path& path);
    const ArchiveHeader& header() const { return header_; }
    // Next spectrum, or nullopt after the last one.
    std::optional<Spectrum> next();

private:
    std::ifstream in_;
    ArchiveHeader header_;
    std::uint64_t offset_ = 0;
    std::uint64_t file_size_ = 0;
    std::uint64_t read_samples_ = 0;
    std::uint64_t read_points_ = 0;
};

}  // namespace nhrmt
