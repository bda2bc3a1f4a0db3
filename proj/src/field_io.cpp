#include "qpat/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qpat/errors.hpp"

namespace qpat {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path with_suffix(const fs::path& stem, const char* ext) {
    fs::path p = stem;
    p += ext;
    return p;
}

std::string encode_le(const std::vector<double>& values) {
    std::string bytes(values.size() * sizeof(double), '\0');
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
    return bytes;
}

std::vector<double> decode_le(const std::string& bytes) {
    std::vector<double> values(bytes.size() / 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
        values[i] = std::bit_cast<double>(bits);
    }
    return values;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json header_for(const Grid& g, const char* kind, json dims) {
    return json{{"dims", std::move(dims)},
                {"domain", g.domain()},
                {"dtype", "f64-le"},
                {"order", "row-major"},
                {"kind", kind},
                {"grid", {{"dim", g.dim()}, {"n", g.n()}}}};
}

struct Loaded {
    Grid grid;
    std::vector<double> values;
};

Loaded load(const fs::path& stem, const char* kind) {
    json header;
    try {
        header = json::parse(slurp(with_suffix(stem, ".json")));
    } catch (const json::exception& e) {
        throw InputError("malformed header " + with_suffix(stem, ".json").string() + ": " + e.what());
    }
    if (header.value("dtype", "") != "f64-le" || header.value("order", "") != "row-major")
        throw InputError(stem.string() + ": unsupported dtype/order");
    const std::string found_kind = header.value("kind", "");
    if (found_kind != kind) throw InputError(stem.string() + ": expected a " + kind + ", found '" + found_kind + "'");

    int dim = 0, n = 0;
    if (header.contains("grid")) {
        dim = header["grid"].value("dim", 0);
        n = header["grid"].value("n", 0);
    } else {
        const auto& dims = header.at("dims");
        dim = static_cast<int>(dims.size());
        n = dims.at(0).get<int>();
    }
    Grid grid = [&] {
        try {
            return build_grid(dim, n);
        } catch (const ParameterError& e) {
            throw InputError(stem.string() + ": " + e.what());
        }
    }();
    auto values = decode_le(slurp(with_suffix(stem, ".bin")));
    return {std::move(grid), std::move(values)};
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw InputError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_field(const fs::path& stem, const ScalarField& f) {
    json dims = json::array();
    for (int a = 0; a < f.grid.dim(); ++a) dims.push_back(f.grid.n());
    write_file_atomic(with_suffix(stem, ".bin"), encode_le(f.values));
    write_file_atomic(with_suffix(stem, ".json"), header_for(f.grid, "scalar-field", dims).dump(2) + "\n");
}

ScalarField read_field(const fs::path& stem) {
    auto loaded = load(stem, "scalar-field");
    if (loaded.values.size() != loaded.grid.node_count())
        throw InputError(stem.string() + ": payload size does not match header");
    return ScalarField(std::move(loaded.grid), std::move(loaded.values));
}

void write_trace(const fs::path& stem, const BoundaryTrace& t) {
    write_file_atomic(with_suffix(stem, ".bin"), encode_le(t.values));
    write_file_atomic(with_suffix(stem, ".json"),
                      header_for(t.grid, "boundary-trace", json::array({t.size()})).dump(2) + "\n");
}

BoundaryTrace read_trace(const fs::path& stem) {
    auto loaded = load(stem, "boundary-trace");
    if (loaded.values.size() != loaded.grid.boundary_count())
        throw InputError(stem.string() + ": payload size does not match header");
    return BoundaryTrace(std::move(loaded.grid), std::move(loaded.values));
}

void write_field_csv(const fs::path& path, const ScalarField& f) {
    if (f.grid.dim() != 2) throw OperationError("CSV export is 2D only");
    std::ostringstream out;
    out.precision(17);
    const int n = f.grid.n();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (i) out << ',';
            out << f[f.grid.index(i, j)];
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

bool field_exists(const fs::path& stem) {
    return fs::exists(with_suffix(stem, ".json")) && fs::exists(with_suffix(stem, ".bin"));
}

}  // namespace qpat
