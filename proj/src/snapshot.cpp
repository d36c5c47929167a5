#include "halfwave/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace halfwave {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

namespace {
struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;
}  // namespace

void save_snapshot(const std::string& path, const ComplexField& f, double time) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw ConfigError("cannot open snapshot for writing: " + path);
    const char magic[4] = {'H', 'W', 'F', '1'};
    const std::uint64_t n = f.grid.n;
    const double box = f.grid.box_length;
    bool ok = std::fwrite(magic, 1, 4, fp.get()) == 4 &&
              std::fwrite(&n, sizeof n, 1, fp.get()) == 1 &&
              std::fwrite(&box, sizeof box, 1, fp.get()) == 1 &&
              std::fwrite(&time, sizeof time, 1, fp.get()) == 1;
    static_assert(sizeof(cplx) == 16, "complex<double> must be two packed f64");
    ok = ok && std::fwrite(f.values.data(), sizeof(cplx), n, fp.get()) == n;
    if (!ok) throw NumericsError("short write while saving snapshot: " + path);
}

Snapshot load_snapshot(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw ConfigError("cannot open snapshot: " + path);
    char magic[4];
    std::uint64_t n = 0;
    double box = 0.0, time = 0.0;
    if (std::fread(magic, 1, 4, fp.get()) != 4 || std::memcmp(magic, "HWF1", 4) != 0)
        throw ConfigError("not a field snapshot (bad magic): " + path);
    if (std::fread(&n, sizeof n, 1, fp.get()) != 1 ||
        std::fread(&box, sizeof box, 1, fp.get()) != 1 ||
        std::fread(&time, sizeof time, 1, fp.get()) != 1)
        throw ConfigError("truncated snapshot header: " + path);
    Grid grid = make_grid(static_cast<std::size_t>(n), box);
    Snapshot snap{ComplexField{grid}, time};
    if (std::fread(snap.field.values.data(), sizeof(cplx), grid.n, fp.get()) != grid.n)
        throw ConfigError("truncated snapshot payload: " + path);
    return snap;
}

}  // namespace halfwave
