#include "bloch/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bloch {

namespace {

// One line of input with its 1-based position, for error reporting.
struct LineReader {
    std::istream& in;
    long line_no = 0;
    bool next(std::string& out) {
        if (!std::getline(in, out)) return false;
        ++line_no;
        return true;
    }
};

std::string chop(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

MmnData parse_mmn(std::istream& in) {
    LineReader lr{in};
    MmnData data;
    std::string line;
    if (!lr.next(line)) throw ParseError(1, "empty stream");
    data.comment = chop(line);
    if (!lr.next(line)) throw ParseError(2, "missing size line");
    {
        std::istringstream ls(line);
        if (!(ls >> data.n_bands >> data.n_kpts >> data.n_neighbors))
            throw ParseError(lr.line_no, "expected three integers: n_bands n_kpts n_neighbors");
        if (data.n_bands <= 0 || data.n_kpts <= 0 || data.n_neighbors <= 0)
            throw ParseError(lr.line_no, "counts must be positive");
    }
    const long expected = long(data.n_kpts) * data.n_neighbors;
    for (long b = 0; b < expected; ++b) {
        if (!lr.next(line)) {
            if (b == 0) throw CountMismatch("no overlap blocks found");
            throw CountMismatch("found " + std::to_string(b) + " blocks, expected " +
                                std::to_string(expected));
        }
        MmnData::Block blk;
        {
            std::istringstream ls(line);
            if (!(ls >> blk.ik >> blk.ik_to >> blk.shift[0] >> blk.shift[1] >> blk.shift[2]))
                throw ParseError(lr.line_no, "expected block header: ik ik_to g1 g2 g3");
        }
        blk.m.resize(data.n_bands, data.n_bands);
        for (int n = 0; n < data.n_bands; ++n)
            for (int m = 0; m < data.n_bands; ++m) { // bra index fastest
                if (!lr.next(line)) throw ParseError(lr.line_no + 1, "truncated overlap block");
                std::istringstream ls(line);
                double re, im;
                if (!(ls >> re >> im))
                    throw ParseError(lr.line_no, "expected two reals: Re Im");
                blk.m(m, n) = cdouble(re, im);
            }
        data.blocks.push_back(std::move(blk));
    }
    return data;
}

void write_mmn(std::ostream& out, const MmnData& data) {
    out << (data.comment.empty() ? "overlaps" : data.comment) << "\n";
    out << data.n_bands << " " << data.n_kpts << " " << data.n_neighbors << "\n";
    for (const auto& blk : data.blocks) {
        out << blk.ik << " " << blk.ik_to << " " << blk.shift[0] << " " << blk.shift[1] << " "
            << blk.shift[2] << "\n";
        for (int n = 0; n < data.n_bands; ++n)
            for (int m = 0; m < data.n_bands; ++m)
                out << format_double(blk.m(m, n).real()) << " "
                    << format_double(blk.m(m, n).imag()) << "\n";
    }
}

EigData parse_eig(std::istream& in) {
    LineReader lr{in};
    EigData data;
    std::string line;
    std::vector<std::array<double, 3>> rows;
    while (lr.next(line)) {
        std::string t = chop(line);
        if (t.empty()) continue;
        std::istringstream ls(t);
        int band, kpt;
        double e;
        if (!(ls >> band >> kpt >> e))
            throw ParseError(lr.line_no, "expected: band k energy");
        rows.push_back({double(band), double(kpt), e});
        data.n_bands = std::max(data.n_bands, band);
        data.n_kpts = std::max(data.n_kpts, kpt);
    }
    if (rows.empty()) throw CountMismatch("no energy rows found");
    if (long(rows.size()) != long(data.n_bands) * data.n_kpts)
        throw CountMismatch("energy rows do not fill n_bands x n_kpts");
    data.energies.assign(rows.size(), 0.0);
    for (const auto& r : rows) {
        long idx = (long(r[1]) - 1) * data.n_bands + (long(r[0]) - 1);
        data.energies[idx] = r[2];
    }
    return data;
}

MmnData synthetic_mmn(const BlochModel& model, const KGrid& grid, const Tolerances& tol) {
    if (grid.dim != model.dim) throw InvalidParams("synthetic_mmn: dimension mismatch");
    std::vector<CMatrix> bases(grid.npoints());
    for (long idx = 0; idx < grid.npoints(); ++idx) {
        HermEig e = herm_eig(model.hamiltonian(grid.point(grid.coords(idx))), tol);
        bases[idx] = e.eigenvectors;
    }
    MmnData data;
    data.comment = "synthetic overlaps: " + model.name;
    data.n_bands = model.n_bands;
    data.n_kpts = int(grid.npoints());
    data.n_neighbors = 2 * grid.dim;
    for (long idx = 0; idx < grid.npoints(); ++idx) {
        Coords c = grid.coords(idx);
        for (int a = 0; a < grid.dim; ++a)
            for (int dir : {+1, -1}) {
                MmnData::Block blk;
                Coords cn = KGrid::step(c, a, dir);
                blk.ik = int(idx) + 1;
                blk.ik_to = int(grid.index(cn)) + 1;
                blk.shift = {0, 0, 0};
                if (cn[a] >= grid.sizes[a]) blk.shift[a] = 1;
                if (cn[a] < 0) blk.shift[a] = -1;
                blk.m = bases[idx].adjoint() * bases[grid.index(cn)];
                data.blocks.push_back(std::move(blk));
            }
    }
    return data;
}

long MmnOverlapProvider::offset_id(const Coords& delta) const {
    return (long(delta[0]) + 128) + 257 * ((long(delta[1]) + 128) + 257 * (long(delta[2]) + 128));
}

MmnOverlapProvider::MmnOverlapProvider(const MmnData& data, const KGrid& grid, int band_lo,
                                       int n_occ, bool strict)
    : grid_(grid), n_occ_(n_occ) {
    if (long(data.n_kpts) != grid.npoints())
        throw CountMismatch("MmnOverlapProvider: file has " + std::to_string(data.n_kpts) +
                            " k-points, grid needs " + std::to_string(grid.npoints()));
    if (band_lo < 0 || band_lo + n_occ > data.n_bands)
        throw InvalidParams("MmnOverlapProvider: band window outside the file's band range");

    for (const auto& blk : data.blocks) {
        Coords ca = grid.coords(blk.ik - 1);
        Coords cb = grid.coords(blk.ik_to - 1);
        Coords delta{0, 0, 0};
        bool ok = true;
        for (int a = 0; a < 3; ++a) {
            delta[a] = cb[a] + blk.shift[a] * grid.sizes[a] - ca[a];
            if (2 * std::abs(delta[a]) > grid.sizes[a]) ok = false;
        }
        if (!ok) {
            if (strict)
                throw InvalidParams("MmnOverlapProvider: block shift vector inconsistent with "
                                    "the declared grid (ik=" + std::to_string(blk.ik) + ")");
            continue;
        }
        blocks_[{blk.ik - 1, offset_id(delta)}] = blk.m.block(band_lo, band_lo, n_occ, n_occ);
        bool seen = false;
        for (const auto& o : offsets_) seen = seen || o == delta;
        if (!seen) offsets_.push_back(delta);
    }

    // transport needs both directions of every grid axis
    for (int a = 0; a < grid.dim; ++a)
        for (int dir : {+1, -1}) {
            Coords delta{0, 0, 0};
            delta[a] = dir;
            Coords zero{0, 0, 0};
            bool have = blocks_.count({0, offset_id(delta)}) > 0;
            Coords minus = {-delta[0], -delta[1], -delta[2]};
            bool have_rev = blocks_.count({grid.index(KGrid::step(zero, a, dir)), offset_id(minus)}) > 0;
            if (!have && !have_rev)
                throw MissingNeighbor("MmnOverlapProvider: no overlaps along axis " +
                                      std::to_string(a) + (dir > 0 ? " (+" : " (-") + ")");
        }
}

CMatrix MmnOverlapProvider::overlap(const Coords& from, const Coords& to) const {
    Coords delta{to[0] - from[0], to[1] - from[1], to[2] - from[2]};
    if (delta == Coords{0, 0, 0}) return CMatrix::Identity(n_occ_, n_occ_);
    long kf = grid_.index(from);
    auto it = blocks_.find({kf, offset_id(delta)});
    if (it != blocks_.end()) return it->second;
    // reverse block: M(k, k+b) = M(k+b, k)^*
    Coords minus{-delta[0], -delta[1], -delta[2]};
    auto rit = blocks_.find({grid_.index(to), offset_id(minus)});
    if (rit != blocks_.end()) return rit->second.adjoint();
    throw MissingNeighbor("MmnOverlapProvider: no overlap block for the requested offset");
}

MVGeometry mv_geometry_from_offsets(const Eigen::MatrixXd& lattice,
                                    const std::vector<Coords>& offsets) {
    MVGeometry g;
    g.lattice = lattice;
    for (const auto& o : offsets) {
        bool seen = false;
        for (const auto& p : g.shell_offsets) seen = seen || p == o;
        if (!seen) g.shell_offsets.push_back(o);
        Coords minus{-o[0], -o[1], -o[2]};
        seen = false;
        for (const auto& p : g.shell_offsets) seen = seen || p == minus;
        if (!seen) g.shell_offsets.push_back(minus);
    }
    return g;
}

namespace {

void write_header(std::ostream& out, const std::string& kind, const KGrid& grid, int n,
                  int tsize, const std::map<std::string, std::string>& meta) {
    out << "blochframe-field 1\n";
    out << "kind " << kind << "\n";
    out << "dim " << grid.dim << "\n";
    out << "sizes";
    for (int a = 0; a < grid.dim; ++a) out << " " << grid.sizes[a];
    out << "\n";
    out << "n " << n << "\n";
    out << "tsize " << tsize << "\n";
    for (const auto& [k, v] : meta) out << "meta " << k << " " << v << "\n";
    out << "end-header\n";
}

void write_matrix_record(std::ostream& out, const CMatrix& m) {
    bool first = true;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (!first) out << " ";
            out << format_double(m(i, j).real()) << " " << format_double(m(i, j).imag());
            first = false;
        }
    out << "\n";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

struct FieldHeader {
    std::string kind;
    KGrid grid;
    int n = 0;
    int tsize = 0;
    std::map<std::string, std::string> meta;
};

FieldHeader read_header(LineReader& lr) {
    FieldHeader h;
    std::string line;
    if (!lr.next(line) || chop(line) != "blochframe-field 1")
        throw ParseError(lr.line_no ? lr.line_no : 1, "not a blochframe field file");
    while (lr.next(line)) {
        std::string t = chop(line);
        if (t == "end-header") return h;
        std::istringstream ls(t);
        std::string key;
        ls >> key;
        if (key == "kind") {
            ls >> h.kind;
        } else if (key == "dim") {
            ls >> h.grid.dim;
        } else if (key == "sizes") {
            for (int a = 0; a < h.grid.dim; ++a)
                if (!(ls >> h.grid.sizes[a]))
                    throw ParseError(lr.line_no, "sizes line shorter than dim");
        } else if (key == "n") {
            ls >> h.n;
        } else if (key == "tsize") {
            ls >> h.tsize;
        } else if (key == "meta") {
            std::string mk, rest;
            ls >> mk;
            std::getline(ls, rest);
            h.meta[mk] = chop(rest);
        } else {
            throw ParseError(lr.line_no, "unknown header key '" + key + "'");
        }
    }
    throw ParseError(lr.line_no, "missing end-header");
}

CMatrix read_matrix_record(LineReader& lr, int n) {
    std::string line;
    if (!lr.next(line)) throw ParseError(lr.line_no + 1, "missing field record");
    std::istringstream ls(line);
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            double re, im;
            if (!(ls >> re >> im)) throw ParseError(lr.line_no, "short field record");
            m(i, j) = cdouble(re, im);
        }
    return m;
}

} // namespace

void emit_field(const UnitaryField& field, const std::string& path,
                const std::map<std::string, std::string>& meta) {
    auto out = open_out(path);
    write_header(out, "unitary_field", field.grid, field.n, 0, meta);
    for (const auto& v : field.values) write_matrix_record(out, v);
}

void emit_field(const GaugeFrame& frame, const std::string& path,
                const std::map<std::string, std::string>& meta) {
    auto out = open_out(path);
    write_header(out, "gauge_frame", frame.grid, frame.n, 0, meta);
    for (const auto& v : frame.coeffs) write_matrix_record(out, v);
}

void emit_field(const Homotopy& homotopy, const std::string& path,
                const std::map<std::string, std::string>& meta) {
    auto out = open_out(path);
    write_header(out, "homotopy", homotopy.kgrid, homotopy.n, homotopy.t_size, meta);
    for (const auto& v : homotopy.values) write_matrix_record(out, v);
}

void emit_field(const RegularityField& field, const std::string& path,
                const std::map<std::string, std::string>& meta) {
    auto out = open_out(path);
    (void)meta;
    for (int a = 0; a < field.grid.dim; ++a) out << "k" << a + 1 << ",";
    out << "value\n";
    for (long idx = 0; idx < field.grid.npoints(); ++idx) {
        auto p = field.grid.point(field.grid.coords(idx));
        for (int a = 0; a < field.grid.dim; ++a) out << format_double(p[a]) << ",";
        out << format_double(field.values[idx]) << "\n";
    }
}

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

} // namespace

UnitaryField read_unitary_field(const std::string& path) {
    auto in = open_in(path);
    LineReader lr{in};
    FieldHeader h = read_header(lr);
    if (h.kind != "unitary_field")
        throw ParseError(lr.line_no, "expected kind unitary_field, found " + h.kind);
    UnitaryField f(h.grid, h.n);
    for (auto& v : f.values) v = read_matrix_record(lr, h.n);
    return f;
}

GaugeFrame read_gauge_frame(const std::string& path) {
    auto in = open_in(path);
    LineReader lr{in};
    FieldHeader h = read_header(lr);
    if (h.kind != "gauge_frame")
        throw ParseError(lr.line_no, "expected kind gauge_frame, found " + h.kind);
    GaugeFrame f(h.grid, h.n);
    for (auto& v : f.coeffs) v = read_matrix_record(lr, h.n);
    return f;
}

Homotopy read_homotopy(const std::string& path) {
    auto in = open_in(path);
    LineReader lr{in};
    FieldHeader h = read_header(lr);
    if (h.kind != "homotopy")
        throw ParseError(lr.line_no, "expected kind homotopy, found " + h.kind);
    Homotopy f(h.grid, h.n, h.tsize);
    for (auto& v : f.values) v = read_matrix_record(lr, h.n);
    f.compute_max_step();
    return f;
}

} // namespace bloch
