#ifndef BLOCH_IO_HPP
#define BLOCH_IO_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bloch/diagnostics.hpp"

namespace bloch {

// Wannier90-style MMN contents: per (k, neighbor) one n_bands x n_bands
// complex block plus the neighbor's k index and its reciprocal shift.
struct MmnData {
    struct Block {
        int ik = 0;      // 1-based, as in the file
        int ik_to = 0;   // 1-based reduced index of the neighbor
        std::array<int, 3> shift{0, 0, 0};
        CMatrix m;
    };
    int n_bands = 0;
    int n_kpts = 0;
    int n_neighbors = 0;
    std::string comment;
    std::vector<Block> blocks;
};

// Format: free comment line; "n_bands n_kpts n_neighbors"; then per block a
// five-integer header and n_bands^2 "Re Im" lines, bra band index fastest.
MmnData parse_mmn(std::istream& in);
void write_mmn(std::ostream& out, const MmnData& data);

struct EigData {
    int n_bands = 0;
    int n_kpts = 0;
    std::vector<double> energies; // k-major
};

// "band k energy" triplets, band fastest.
EigData parse_eig(std::istream& in);

// Full-band overlaps of a model on a 2d/3d grid, written the way a
// plane-wave code would hand them over: one block per +-axis neighbor.
MmnData synthetic_mmn(const BlochModel& model, const KGrid& grid, const Tolerances& tol = {});

// Overlap provider over ingested MMN blocks restricted to a band window
// [band_lo, band_lo + n_occ). In strict mode blocks whose shift vector is
// inconsistent with the declared grid are rejected.
class MmnOverlapProvider : public OverlapProvider {
public:
    MmnOverlapProvider(const MmnData& data, const KGrid& grid, int band_lo, int n_occ,
                       bool strict = true);

    int n_occ() const override { return n_occ_; }
    const KGrid& grid() const override { return grid_; }
    CMatrix overlap(const Coords& from, const Coords& to) const override;

    // offsets present in the file (one entry per direction)
    const std::vector<Coords>& offsets() const { return offsets_; }

private:
    KGrid grid_;
    int n_occ_;
    std::vector<Coords> offsets_;
    std::map<std::pair<long, long>, CMatrix> blocks_; // (k_linear, offset_id)
    long offset_id(const Coords& delta) const;
};

// Shells for spread() from whatever neighbors an MMN file provides.
MVGeometry mv_geometry_from_offsets(const Eigen::MatrixXd& lattice,
                                    const std::vector<Coords>& offsets);

// Self-describing text field format. Header carries kind, dims, sizes, N,
// the t-grid size for homotopies and free-form metadata; records are "Re Im"
// pairs in shortest round-trip decimal, so identical inputs give
// byte-identical files.
void emit_field(const UnitaryField& field, const std::string& path,
                const std::map<std::string, std::string>& meta = {});
void emit_field(const GaugeFrame& frame, const std::string& path,
                const std::map<std::string, std::string>& meta = {});
void emit_field(const Homotopy& homotopy, const std::string& path,
                const std::map<std::string, std::string>& meta = {});
// Regularity fields serialize as CSV: one row per point, k-coordinates then
// the value.
void emit_field(const RegularityField& field, const std::string& path,
                const std::map<std::string, std::string>& meta = {});

UnitaryField read_unitary_field(const std::string& path);
GaugeFrame read_gauge_frame(const std::string& path);
Homotopy read_homotopy(const std::string& path);

std::string format_double(double x); // shortest round-trip decimal

} // namespace bloch

#endif
