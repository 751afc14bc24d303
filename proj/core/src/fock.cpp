#include "qmetro/fock.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qmetro {

int FockState::total() const {
    return std::accumulate(occupations.begin(), occupations.end(), 0);
}

int FockState::total(Pol pol) const {
    int sum = 0;
    for (int p = 0; p < num_ports; ++p) sum += at(p, pol);
    return sum;
}

std::vector<int> FockState::port_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(num_ports), 0);
    for (int p = 0; p < num_ports; ++p) {
        counts[static_cast<std::size_t>(p)] = at(p, Pol::H) + at(p, Pol::V);
    }
    return counts;
}

FockState FockState::one_per_port(int ports, std::size_t bits) {
    FockState f(ports);
    for (int p = 0; p < ports; ++p) {
        const bool v = (bits >> (ports - 1 - p)) & 1u;
        f.at(p, v ? Pol::V : Pol::H) = 1;
    }
    return f;
}

std::vector<int> PortSignature::pattern() const {
    std::vector<int> out = counts;
    std::sort(out.begin(), out.end(), std::greater<int>());
    while (!out.empty() && out.back() == 0) out.pop_back();
    return out;
}

std::vector<std::vector<int>> enumerate_occupations(int modes, int particles,
                                                    int cap_per_mode) {
    if (modes < 1 || particles < 0) {
        throw std::invalid_argument("enumerate_occupations: bad arguments");
    }
    std::vector<std::vector<int>> out;
    std::vector<int> occ(static_cast<std::size_t>(modes), 0);

    // Depth-first over modes, last mode varying fastest reversed gives colex;
    // recursion assigns counts mode by mode.
    const int cap = cap_per_mode < 0 ? particles : cap_per_mode;
    auto rec = [&](auto&& self, int mode, int left) -> void {
        if (mode == modes - 1) {
            if (left <= cap) {
                occ[static_cast<std::size_t>(mode)] = left;
                out.push_back(occ);
            }
            return;
        }
        for (int k = 0; k <= std::min(left, cap); ++k) {
            occ[static_cast<std::size_t>(mode)] = k;
            self(self, mode + 1, left - k);
        }
    };
    rec(rec, 0, particles);
    return out;
}

} // namespace qmetro
