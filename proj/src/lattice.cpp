#include "entrosim/lattice.hpp"

#include <stdexcept>
#include <string>

namespace entrosim {

TorusLattice::TorusLattice(int L) : L_(L) {
    if (L < 2)
        throw std::invalid_argument("TorusLattice: L must be >= 2, got " + std::to_string(L));
    if (L > 4096) throw std::invalid_argument("TorusLattice: L too large");
}

LinkCoord TorusLattice::link_coord(Link l) const {
    check_link(l);
    const int dir = static_cast<int>(l & 1u);
    const int site = static_cast<int>(l >> 1);
    return {site % L_, site / L_, dir};
}

std::array<int, 2> TorusLattice::plaquettes_of_link(Link l) const {
    const auto c = link_coord(l);
    if (c.dir == 0)  // horizontal: bottom edge of (x,y), top edge of (x,y-1)
        return {plaquette_id(c.x, c.y), plaquette_id(c.x, c.y - 1)};
    // vertical: left edge of (x,y), right edge of (x-1,y)
    return {plaquette_id(c.x, c.y), plaquette_id(c.x - 1, c.y)};
}

std::array<int, 2> TorusLattice::vertices_of_link(Link l) const {
    const auto c = link_coord(l);
    if (c.dir == 0) return {vertex_id(c.x, c.y), vertex_id(c.x + 1, c.y)};
    return {vertex_id(c.x, c.y), vertex_id(c.x, c.y + 1)};
}

std::array<Link, 4> TorusLattice::links_of_plaquette(int p) const {
    check_site(p);
    const int x = p % L_, y = p / L_;
    return {link_id(x, y, 0), link_id(x, y + 1, 0), link_id(x, y, 1), link_id(x + 1, y, 1)};
}

std::array<Link, 4> TorusLattice::links_of_vertex(int v) const {
    check_site(v);
    const int x = v % L_, y = v / L_;
    return {link_id(x, y, 0), link_id(x - 1, y, 0), link_id(x, y, 1), link_id(x, y - 1, 1)};
}

bool TorusLattice::crosses_cut(Sector s, Link l, int axis) const {
    const auto c = link_coord(l);
    if (s == Sector::X) {
        // plaquette-defect paths live on the dual lattice
        if (axis == 0) return c.dir == 1 && c.x == 0;
        return c.dir == 0 && c.y == 0;
    }
    if (axis == 0) return c.dir == 0 && c.x == 0;
    return c.dir == 1 && c.y == 0;
}

void TorusLattice::check_link(Link l) const {
    if (l >= static_cast<Link>(links()))
        throw std::out_of_range("TorusLattice: link index " + std::to_string(l) +
                                " out of range (links=" + std::to_string(links()) + ")");
}

void TorusLattice::check_site(int id) const {
    if (id < 0 || id >= plaquettes())
        throw std::out_of_range("TorusLattice: site index " + std::to_string(id) + " out of range");
}

}  // namespace entrosim
