#include "bettiml/persistence.hpp"

#include <algorithm>
#include <array>
#include <iterator>
#include <fstream>
#include <numeric>
#include <ostream>

#include "bettiml/error.hpp"

namespace bettiml {

void PersistenceDiagram::normalize() { std::sort(bars.begin(), bars.end()); }

std::size_t PersistenceDiagram::essential_count() const {
    return static_cast<std::size_t>(
        std::count_if(bars.begin(), bars.end(), [](const auto& b) { return b.essential(); }));
}

std::ostream& operator<<(std::ostream& os, const PersistenceDiagram& pd) {
    os << "PD" << pd.dim << "{";
    for (std::size_t i = 0; i < pd.bars.size(); ++i)
        os << (i ? ", " : "") << '(' << pd.bars[i].birth << ',' << pd.bars[i].death << ')';
    return os << '}';
}

namespace {

std::vector<std::uint8_t> pixel_values(const CubicalFiltration& f) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(f.rows()) * f.cols());
    for (int r = 0; r < f.rows(); ++r)
        for (int c = 0; c < f.cols(); ++c)
            px[static_cast<std::size_t>(r) * f.cols() + c] = f.value(2 * r + 1, 2 * c + 1);
    return px;
}

// Pixel indices sorted by (value, index); a counting sort keeps it linear.
std::vector<std::uint32_t> ascending_order(const std::vector<std::uint8_t>& px) {
    std::array<std::uint32_t, 257> start{};
    for (auto v : px) ++start[v + 1u];
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<std::uint32_t> order(px.size());
    for (std::uint32_t i = 0; i < px.size(); ++i) order[start[px[i]]++] = i;
    return order;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void attach(std::uint32_t child, std::uint32_t root) { parent_[child] = root; }

private:
    std::vector<std::uint32_t> parent_;
};

}  // namespace

PersistenceDiagram compute_pd0(const CubicalFiltration& f) {
    const int rows = f.rows();
    const int cols = f.cols();
    const auto px = pixel_values(f);
    const auto order = ascending_order(px);

    // Roots are always the oldest pixel of their component because pixels
    // are visited in (value, index) order and older roots win every merge.
    UnionFind uf(px.size());
    std::vector<char> active(px.size(), 0);
    PersistenceDiagram pd{0, {}};

    auto older = [&](std::uint32_t a, std::uint32_t b) {
        return px[a] != px[b] ? px[a] < px[b] : a < b;
    };

    for (const std::uint32_t p : order) {
        active[p] = 1;
        const int r = static_cast<int>(p) / cols;
        const int c = static_cast<int>(p) % cols;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                const int nr = r + dr;
                const int nc = c + dc;
                if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
                const auto q = static_cast<std::uint32_t>(nr * cols + nc);
                if (!active[q]) continue;
                std::uint32_t a = uf.find(p);
                std::uint32_t b = uf.find(q);
                if (a == b) continue;
                if (older(b, a)) std::swap(a, b);
                pd.add(px[b], px[p]);
                uf.attach(b, a);
            }
        }
    }
    pd.add(px[order.front()], kEssentialDeath);
    pd.normalize();
    return pd;
}

PersistenceDiagram compute_pd1(const CubicalFiltration& f) {
    const int rows = f.rows();
    const int cols = f.cols();
    const auto px = pixel_values(f);
    auto order = ascending_order(px);
    std::reverse(order.begin(), order.end());

    // Node n = pixel count is the unbounded outside region; it never dies.
    const auto outside = static_cast<std::uint32_t>(px.size());
    UnionFind uf(px.size() + 1);
    std::vector<int> peak(px.size() + 1, 0);
    peak[outside] = kEssentialDeath + 1;
    std::vector<char> active(px.size() + 1, 0);
    active[outside] = 1;
    PersistenceDiagram pd{1, {}};

    for (const std::uint32_t p : order) {
        active[p] = 1;
        peak[p] = px[p];
        const int r = static_cast<int>(p) / cols;
        const int c = static_cast<int>(p) % cols;
        std::uint32_t nbrs[4];
        int n = 0;
        if (r == 0 || r == rows - 1 || c == 0 || c == cols - 1) nbrs[n++] = outside;
        if (r > 0) nbrs[n++] = p - cols;
        if (r < rows - 1) nbrs[n++] = p + cols;
        if (c > 0) nbrs[n++] = p - 1;
        if (c < cols - 1) nbrs[n++] = p + 1;
        for (int k = 0; k < n; ++k) {
            if (!active[nbrs[k]]) continue;
            std::uint32_t a = uf.find(p);
            std::uint32_t b = uf.find(nbrs[k]);
            if (a == b) continue;
            if (peak[a] < peak[b]) std::swap(a, b);
            // b is the younger region in the downward sweep: the hole it
            // fills exists on [value(p), peak(b)).
            pd.add(px[p], peak[b]);
            uf.attach(b, a);
        }
    }
    pd.normalize();
    return pd;
}

std::pair<PersistenceDiagram, PersistenceDiagram> reduce_boundary_matrix(
    const CubicalFiltration& f) {
    const std::size_t n = f.cell_count();
    const int gc = f.grid_cols();
    auto dim_of_cell = [&](std::size_t cell) {
        return CubicalFiltration::dim_of(static_cast<int>(cell / gc), static_cast<int>(cell % gc));
    };

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (f.value(a) != f.value(b)) return f.value(a) < f.value(b);
        const int da = dim_of_cell(a);
        const int db = dim_of_cell(b);
        if (da != db) return da < db;
        return a < b;
    });
    std::vector<std::uint32_t> rank(n);
    for (std::uint32_t k = 0; k < n; ++k) rank[order[k]] = k;

    constexpr std::uint32_t kNone = ~0u;
    std::vector<std::vector<std::uint32_t>> columns(n);
    std::vector<std::uint32_t> pivot_owner(n, kNone);
    std::vector<char> cleared(n, 0);
    std::vector<std::size_t> faces;
    std::vector<std::uint32_t> scratch;

    PersistenceDiagram pd0{0, {}};
    PersistenceDiagram pd1{1, {}};

    for (int dim = 2; dim >= 1; --dim) {
        for (std::uint32_t k = 0; k < n; ++k) {
            const std::uint32_t cell = order[k];
            if (dim_of_cell(cell) != dim || cleared[k]) continue;
            auto& col = columns[k];
            f.boundary(static_cast<int>(cell / gc), static_cast<int>(cell % gc), faces);
            col.clear();
            for (auto face : faces) col.push_back(rank[face]);
            std::sort(col.begin(), col.end());
            while (!col.empty() && pivot_owner[col.back()] != kNone) {
                const auto& other = columns[pivot_owner[col.back()]];
                scratch.clear();
                std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                              std::back_inserter(scratch));
                col.swap(scratch);
            }
            if (col.empty()) continue;
            const std::uint32_t low = col.back();
            pivot_owner[low] = k;
            cleared[low] = 1;  // the paired lower cell is positive: its own column reduces to 0
            auto& pd = dim == 2 ? pd1 : pd0;
            pd.add(f.value(order[low]), f.value(cell));
        }
    }

    // Unpaired cells are essential classes. Positive faces (H2) cannot occur
    // in a planar complex.
    for (std::uint32_t k = 0; k < n; ++k) {
        const int dim = dim_of_cell(order[k]);
        if (dim == 2 || pivot_owner[k] != kNone) continue;
        const bool negative = dim == 1 && !columns[k].empty();
        if (negative) continue;
        auto& pd = dim == 0 ? pd0 : pd1;
        pd.add(f.value(order[k]), kEssentialDeath);
    }
    pd0.normalize();
    pd1.normalize();
    return {std::move(pd0), std::move(pd1)};
}

BettiNumbers betti_oracle(const GrayImage& image, int t) {
    if (t < 0 || t > 255) throw Error("betti_oracle: threshold outside [0, 255]");
    const int rows = image.height();
    const int cols = image.width();
    auto in = [&](int r, int c) {
        return r >= 0 && r < rows && c >= 0 && c < cols && image.at(r, c) <= t;
    };

    std::vector<char> seen(image.size(), 0);
    std::vector<std::pair<int, int>> stack;
    int components = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (!in(r, c) || seen[image.index(r, c)]) continue;
            ++components;
            seen[image.index(r, c)] = 1;
            stack.assign(1, {r, c});
            while (!stack.empty()) {
                auto [cr, cc] = stack.back();
                stack.pop_back();
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int nr = cr + dr;
                        const int nc = cc + dc;
                        if (!in(nr, nc) || seen[image.index(nr, nc)]) continue;
                        seen[image.index(nr, nc)] = 1;
                        stack.emplace_back(nr, nc);
                    }
                }
            }
        }
    }

    // A cell is present when any pixel containing it is present.
    long vertices = 0;
    long edges = 0;
    long faces = 0;
    for (int i = 0; i <= rows; ++i)
        for (int j = 0; j <= cols; ++j)
            vertices += in(i - 1, j - 1) || in(i - 1, j) || in(i, j - 1) || in(i, j);
    for (int i = 0; i <= rows; ++i)
        for (int j = 0; j < cols; ++j) edges += in(i - 1, j) || in(i, j);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j <= cols; ++j) edges += in(i, j - 1) || in(i, j);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) faces += in(i, j);

    const long chi = vertices - edges + faces;
    return {components, static_cast<int>(components - chi)};
}

void write_diagrams_csv(const std::filesystem::path& path, const PersistenceDiagram& pd0,
                        const PersistenceDiagram& pd1) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "dim,birth,death\n";
    for (const auto* pd : {&pd0, &pd1})
        for (const auto& b : pd->bars) out << pd->dim << ',' << b.birth << ',' << b.death << '\n';
}

}  // namespace bettiml
