#pragma once

#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "bettiml/filtration.hpp"
#include "bettiml/imaging.hpp"

namespace bettiml {

/// Death value of a class that never dies (one past the largest intensity).
inline constexpr int kEssentialDeath = 256;

struct PersistenceBar {
    int birth = 0;
    int death = kEssentialDeath;

    bool essential() const { return death == kEssentialDeath; }
    auto operator<=>(const PersistenceBar&) const = default;
};

/// Bars of one homology dimension. Bars are kept sorted so that equality is
/// multiset equality; zero-length bars are never stored.
struct PersistenceDiagram {
    int dim = 0;
    std::vector<PersistenceBar> bars;

    void add(int birth, int death) {
        if (birth < death) bars.push_back({birth, death});
    }
    void normalize();
    std::size_t essential_count() const;

    bool operator==(const PersistenceDiagram&) const = default;
};

std::ostream& operator<<(std::ostream& os, const PersistenceDiagram& pd);

/// Elder-rule union-find over 8-connected pixels. On a merge the component
/// with the later birth dies; equal births keep the component whose oldest
/// pixel has the smaller row-major index.
PersistenceDiagram compute_pd0(const CubicalFiltration& f);

/// Loops of the sublevel complexes, computed through the planar dual: bounded
/// 4-connected components of the superlevel complement, swept downward with
/// the region outside the grid as the eldest component.
PersistenceDiagram compute_pd1(const CubicalFiltration& f);

/// Serial reference: Z/2 boundary-matrix reduction of the full cubical
/// complex, columns ordered by (value, dimension, cell index), with clearing.
/// Returns {PD0, PD1}.
std::pair<PersistenceDiagram, PersistenceDiagram> reduce_boundary_matrix(
    const CubicalFiltration& f);

struct BettiNumbers {
    int b0 = 0;
    int b1 = 0;
    bool operator==(const BettiNumbers&) const = default;
};

/// Betti numbers of the sublevel complex at threshold t, computed directly
/// from the image: b0 by flood fill over 8-connected pixels, b1 = b0 - chi.
BettiNumbers betti_oracle(const GrayImage& image, int t);

void write_diagrams_csv(const std::filesystem::path& path, const PersistenceDiagram& pd0,
                        const PersistenceDiagram& pd1);

}  // namespace bettiml
