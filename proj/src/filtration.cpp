#include "bettiml/filtration.hpp"

#include <algorithm>

#include "bettiml/error.hpp"

namespace bettiml {

void validate(const ThresholdGrid& grid) {
    if (grid.count < 1 || grid.first < 0 || grid.last() > 255)
        throw Error("threshold grid must lie within [0, 255]");
}

CubicalFiltration::CubicalFiltration(const GrayImage& image)
    : rows_(image.height()), cols_(image.width()) {
    if (image.empty()) throw Error("cannot build a filtration from an empty image");
    const int gr = grid_rows();
    const int gc = grid_cols();
    values_.assign(static_cast<std::size_t>(gr) * gc, 255);
    // Each pixel lowers the 9 positions of its closed square.
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            const std::uint8_t v = image.at(r, c);
            for (int di = 0; di <= 2; ++di) {
                for (int dj = 0; dj <= 2; ++dj) {
                    auto& cell = values_[cell_index(2 * r + di, 2 * c + dj)];
                    cell = std::min(cell, v);
                }
            }
        }
    }
}

std::size_t CubicalFiltration::count_cells(int dim) const {
    std::size_t n = 0;
    for (int i = 0; i < grid_rows(); ++i)
        for (int j = 0; j < grid_cols(); ++j) n += dim_of(i, j) == dim;
    return n;
}

void CubicalFiltration::boundary(int i, int j, std::vector<std::size_t>& out) const {
    out.clear();
    if (i & 1) {
        out.push_back(cell_index(i - 1, j));
        out.push_back(cell_index(i + 1, j));
    }
    if (j & 1) {
        out.push_back(cell_index(i, j - 1));
        out.push_back(cell_index(i, j + 1));
    }
    std::sort(out.begin(), out.end());
}

bool CubicalFiltration::is_monotone() const {
    std::vector<std::size_t> faces;
    for (int i = 0; i < grid_rows(); ++i) {
        for (int j = 0; j < grid_cols(); ++j) {
            boundary(i, j, faces);
            for (auto f : faces)
                if (values_[f] > value(i, j)) return false;
        }
    }
    return true;
}

CubicalFiltration build_filtration(const GrayImage& image) { return CubicalFiltration(image); }

}  // namespace bettiml
