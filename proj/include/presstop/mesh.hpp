#pragma once

#include <array>
#include <vector>

namespace presstop {

// Structured grid of unit Q4 elements.
//
// Nodes are numbered column-major, top-to-bottom then left-to-right, so the
// node at grid row r (counted from the top) and column c has id
// c*(nely+1) + r. Node n carries displacement DOFs 2n (x) and 2n+1 (y) and
// pressure DOF n. Elements follow the same column-major order: element
// (r, c) has id c*nely + r. Element-local node order is counter-clockwise
// starting at the bottom-left corner: [BL, BR, TR, TL].
class Mesh {
public:
    Mesh(int nelx, int nely);

    int nelx() const { return nelx_; }
    int nely() const { return nely_; }
    int num_elements() const { return nelx_ * nely_; }
    int num_nodes() const { return (nelx_ + 1) * (nely_ + 1); }
    int num_udofs() const { return 2 * num_nodes(); }

    int node_id(int row, int col) const { return col * (nely_ + 1) + row; }
    int elem_id(int row, int col) const { return col * nely_ + row; }
    int elem_row(int e) const { return e % nely_; }
    int elem_col(int e) const { return e / nely_; }

    // Four pressure DOFs (= node ids) of element e, order [BL, BR, TR, TL].
    const std::array<int, 4>& pdofs(int e) const { return pdofs_[e]; }
    // Eight displacement DOFs of element e: [BLx, BLy, BRx, BRy, TRx, TRy, TLx, TLy].
    const std::array<int, 8>& udofs(int e) const { return udofs_[e]; }

    // Boundary node lists. Left/right run top-to-bottom; bottom/top run
    // left-to-right. Corner nodes appear in both adjacent lists.
    const std::vector<int>& left_nodes() const { return lnode_; }
    const std::vector<int>& right_nodes() const { return rnode_; }
    const std::vector<int>& top_nodes() const { return tnode_; }
    const std::vector<int>& bottom_nodes() const { return bnode_; }

private:
    int nelx_, nely_;
    std::vector<std::array<int, 4>> pdofs_;
    std::vector<std::array<int, 8>> udofs_;
    std::vector<int> lnode_, rnode_, tnode_, bnode_;
};

} // namespace presstop
