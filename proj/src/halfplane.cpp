#include "forge/halfplane.hpp"

namespace forge {

// Explicit double instantiations of the templated geometry (multiprecision
// instantiations live in the translation units that opt into them).
template struct M2<double>;
template struct Pt<double>;
template Pt<double> moebius(const M2<double>&, const Pt<double>&);
template double cosh_dist(const Pt<double>&, const Pt<double>&);
template M2<double> frame_of_segment(const Pt<double>&, const Pt<double>&);
template M2<double> carry_segment(const Pt<double>&, const Pt<double>&,
                                  const Pt<double>&, const Pt<double>&);
template PolygonData<double> regular_polygon(int g);
template std::vector<M2<double>> fuchsian_generators(int g);
template AxisFrame<double> axis_frame(M2<double> M);

}  // namespace forge
