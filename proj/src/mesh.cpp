#include "presstop/mesh.hpp"

#include <stdexcept>

namespace presstop {

Mesh::Mesh(int nelx, int nely) : nelx_(nelx), nely_(nely) {
    if (nelx < 1 || nely < 1)
        throw std::invalid_argument("mesh dimensions must be positive");

    pdofs_.resize(num_elements());
    udofs_.resize(num_elements());
    for (int c = 0; c < nelx_; ++c) {
        for (int r = 0; r < nely_; ++r) {
            const int e = elem_id(r, c);
            const int tl = node_id(r, c);
            // counter-clockwise from bottom-left
            const std::array<int, 4> nodes = {tl + 1, tl + nely_ + 2,
                                              tl + nely_ + 1, tl};
            pdofs_[e] = nodes;
            for (int k = 0; k < 4; ++k) {
                udofs_[e][2 * k] = 2 * nodes[k];
                udofs_[e][2 * k + 1] = 2 * nodes[k] + 1;
            }
        }
    }

    lnode_.reserve(nely_ + 1);
    rnode_.reserve(nely_ + 1);
    for (int r = 0; r <= nely_; ++r) {
        lnode_.push_back(node_id(r, 0));
        rnode_.push_back(node_id(r, nelx_));
    }
    tnode_.reserve(nelx_ + 1);
    bnode_.reserve(nelx_ + 1);
    for (int c = 0; c <= nelx_; ++c) {
        tnode_.push_back(node_id(0, c));
        bnode_.push_back(node_id(nely_, c));
    }
}

} // namespace presstop
