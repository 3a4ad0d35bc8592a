#ifndef CIV_OPTIMAL_HPP
#define CIV_OPTIMAL_HPP

#include <civ/criteria.hpp>
#include <civ/graph.hpp>

namespace civ {

struct OptimalResult {
    NodeSet w_opt;
    NodeSet z_opt;
    bool is_valid;               // z_opt nonempty; the tuple is then valid
    bool optimality_certified;   // z_opt meets pa(X) u sib(X)
};

// District-based tuple construction: W* collects the covariates that pin down
// Y's residual as tightly as the graph allows, Z* then collects the remaining
// covariates that maximize the instrument information on X. When z_opt is
// empty no claim is made (other tuples may still be valid); when the
// certification flag is false the tuple is still returned but its
// graphical-optimality guarantee does not apply.
inline OptimalResult optimal_cis(const Admg& g, int x, int y) {
    require_reduced(g, x, y);
    NodeSet xy(std::vector<int>{x, y});

    OptimalResult r{};
    r.w_opt = district_plus(g, y, NodeSet::single(x)).minus(xy);
    r.z_opt = district_plus(g, x, NodeSet::single(y)).minus(xy.unite(r.w_opt));
    r.is_valid = !r.z_opt.empty();
    NodeSet hub = parents(g, NodeSet::single(x)).unite(siblings(g, NodeSet::single(x)));
    r.optimality_certified = r.is_valid && r.z_opt.intersects(hub);
    return r;
}

}  // namespace civ

#endif  // CIV_OPTIMAL_HPP
