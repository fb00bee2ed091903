#ifndef BNNCIM_GRID_HPP
#define BNNCIM_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bnncim {

/// Minimal dense row-major matrix. Just enough for weight grids and
/// per-(row,word) state; not a linear algebra library.
template <class T>
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool same_shape(const Grid& o) const { return rows == o.rows && cols == o.cols; }
    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
    }
};

template <class T>
void require_shape(const Grid<T>& g, std::size_t r, std::size_t c, const char* what) {
    if (g.rows != r || g.cols != c)
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

} // namespace bnncim

#endif
