#include "cvflock/expert.hpp"

#include <string>

namespace cvflock {

namespace {

// -2 T/|T|^4 + 2 T/|T|^2 for T with squared norm r2
inline Complex pair_potential(Complex t, double r2) {
  return t * (-2.0 / (r2 * r2) + 2.0 / r2);
}

}  // namespace

Complex relative_position(const SwarmState& s, int i, int j) {
  return rotate(embed(s.pos[j] - s.pos[i]), s.frame[i].inverse());
}

ComplexVector nominal_control(const SwarmState& s) {
  const int n = s.size();
  ComplexVector u(n);
  for (int i = 0; i < n; ++i) {
    const Rotation to_body = s.frame[i].inverse();
    const Complex vi = rotate(embed(s.vel[i]), to_body);
    Complex acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double r2 = norm_sq(s.pos[j] - s.pos[i]);
      if (r2 == 0.0)
        throw SimFault("nominal_control: agents " + std::to_string(i) +
                       " and " + std::to_string(j) + " are coincident");
      const Complex vj = rotate(embed(s.vel[j]), to_body);
      const Complex t = rotate(embed(s.pos[j] - s.pos[i]), to_body);
      acc += (vj - vi) + pair_potential(t, r2);
    }
    u[i] = acc;
  }
  return u;
}

ComplexVector local_nominal_control(const SwarmState& s,
                                    const EncodedGraph& g) {
  const int n = s.size();
  ComplexVector u(n);
  for (int i = 0; i < n; ++i) {
    const Rotation to_body = s.frame[i].inverse();
    const Complex vi = rotate(embed(s.vel[i]), to_body);
    Complex acc = 0.0;
    for (const auto& e : g.nbrs[i]) {
      const double r2 = norm_sq(s.pos[e.j] - s.pos[i]);
      if (r2 == 0.0)
        throw SimFault("local_nominal_control: agents " + std::to_string(i) +
                       " and " + std::to_string(e.j) + " are coincident");
      const Complex vj = e.rot * rotate(embed(s.vel[e.j]),
                                        s.frame[e.j].inverse());
      const Complex t = relative_position(s, i, e.j);
      acc += (vj - vi) + pair_potential(t, r2);
    }
    u[i] = acc;
  }
  return u;
}

void local_features(const SwarmState& s, EncodedGraph& g) {
  const int n = s.size();
  for (int i = 0; i < n; ++i) {
    const Complex vi = rotate(embed(s.vel[i]), s.frame[i].inverse());
    Complex vel_disagreement = 0.0;
    Complex inv_sq = 0.0;
    Complex inv_quart = 0.0;
    for (const auto& e : g.nbrs[i]) {
      const Complex vj = e.rot * rotate(embed(s.vel[e.j]),
                                        s.frame[e.j].inverse());
      vel_disagreement += vi - vj;
      const Complex t = relative_position(s, i, e.j);
      const double r2 = std::norm(t);
      inv_sq += t / r2;
      inv_quart += t / (r2 * r2);
    }
    g.features[i] = {vel_disagreement, inv_sq, inv_quart};
  }
}

}  // namespace cvflock
