#pragma once

#include <array>
#include <cstdint>

namespace entrosim {

// Error sector: X errors move plaquette defects, Z errors move vertex defects.
enum class Sector : int { X = 0, Z = 1 };

using Link = std::uint32_t;

struct LinkCoord {
    int x;
    int y;
    int dir;  // 0: link from (x,y) to (x+1,y); 1: link from (x,y) to (x,y+1)
};

// L x L square lattice on the torus. Qubits live on the 2L^2 links, vertex
// stabilizers on the L^2 sites, plaquette stabilizers on the L^2 faces.
//
// Index conventions (fixed so that trajectories replay across implementations):
//   link id      = (y*L + x)*2 + dir, dir as in LinkCoord
//   plaquette id = y*L + x for the face with lower-left corner (x,y)
//   vertex id    = y*L + x
//
// Homology cuts are the link sets crossed by the two fixed non-contractible
// test loops, one per winding axis, pinned at x = 0 and y = 0:
//   X sector: axis 0 (x-winding) = vertical links at x = 0,
//             axis 1 (y-winding) = horizontal links at y = 0
//   Z sector: axis 0 (x-winding) = horizontal links at x = 0,
//             axis 1 (y-winding) = vertical links at y = 0
// Each cut contains exactly L links.
class TorusLattice {
public:
    explicit TorusLattice(int L);

    int size() const { return L_; }
    int links() const { return 2 * L_ * L_; }
    int plaquettes() const { return L_ * L_; }
    int vertices() const { return L_ * L_; }
    int stabilizers(Sector) const { return L_ * L_; }

    Link link_id(int x, int y, int dir) const {
        return static_cast<Link>((wrap(y) * L_ + wrap(x)) * 2 + dir);
    }
    LinkCoord link_coord(Link l) const;

    int plaquette_id(int x, int y) const { return wrap(y) * L_ + wrap(x); }
    int vertex_id(int x, int y) const { return wrap(y) * L_ + wrap(x); }

    std::array<int, 2> plaquettes_of_link(Link l) const;
    std::array<int, 2> vertices_of_link(Link l) const;
    std::array<Link, 4> links_of_plaquette(int p) const;
    std::array<Link, 4> links_of_vertex(int v) const;

    std::array<int, 2> stabilizers_of_link(Sector s, Link l) const {
        return s == Sector::X ? plaquettes_of_link(l) : vertices_of_link(l);
    }
    std::array<Link, 4> links_of_stabilizer(Sector s, int id) const {
        return s == Sector::X ? links_of_plaquette(id) : links_of_vertex(id);
    }

    bool crosses_cut(Sector s, Link l, int axis) const;
    // bit 0: axis-0 cut, bit 1: axis-1 cut
    std::uint8_t cut_mask(Sector s, Link l) const {
        return static_cast<std::uint8_t>(crosses_cut(s, l, 0) | (crosses_cut(s, l, 1) << 1));
    }

    void check_link(Link l) const;
    void check_site(int id) const;

private:
    int wrap(int a) const {
        a %= L_;
        return a < 0 ? a + L_ : a;
    }
    int L_;
};

}  // namespace entrosim
