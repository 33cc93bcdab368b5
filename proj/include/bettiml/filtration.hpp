#pragma once

#include <cstdint>
#include <vector>

#include "bettiml/imaging.hpp"

namespace bettiml {

/// Threshold grid {first, first+1, ..., first+count-1}. The default is the
/// 255-level grid {0..254}.
struct ThresholdGrid {
    int first = 0;
    int count = 255;

    int last() const { return first + count - 1; }
};

void validate(const ThresholdGrid& grid);

/// Lower-star cubical complex of a pixel grid (pixels are the top cells).
///
/// Cells live on the doubled grid of (2r+1) x (2s+1) positions: a position
/// (i, j) is a vertex when both coordinates are even, a face (pixel) when both
/// are odd, and an edge otherwise. Pixel (row, col) sits at (2row+1, 2col+1).
class CubicalFiltration {
public:
    explicit CubicalFiltration(const GrayImage& image);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int grid_rows() const { return 2 * rows_ + 1; }
    int grid_cols() const { return 2 * cols_ + 1; }
    std::size_t cell_count() const { return values_.size(); }

    static int dim_of(int i, int j) { return (i & 1) + (j & 1); }

    std::uint8_t value(int i, int j) const {
        return values_[static_cast<std::size_t>(i) * grid_cols() + j];
    }
    std::uint8_t value(std::size_t cell) const { return values_[cell]; }

    std::size_t cell_index(int i, int j) const {
        return static_cast<std::size_t>(i) * grid_cols() + j;
    }

    std::size_t count_cells(int dim) const;

    /// Codimension-1 faces of the cell at (i, j), as cell indices.
    void boundary(int i, int j, std::vector<std::size_t>& out) const;

    /// True when every cell's value is <= the values of all its cofaces.
    bool is_monotone() const;

private:
    int rows_;
    int cols_;
    std::vector<std::uint8_t> values_;
};

CubicalFiltration build_filtration(const GrayImage& image);

}  // namespace bettiml
