#pragma once

#include <compare>
#include <cstddef>
#include <vector>

namespace qmetro {

enum class Statistics { boson, fermion };

enum class Pol : int { H = 0, V = 1 };

/// Occupation numbers over 2N modes: mode index = 2*port + pol, ports 0..N-1,
/// H before V at each port (the canonical operator ordering for fermions).
struct FockState {
    int num_ports = 0;
    std::vector<int> occupations; // size 2*num_ports

    FockState() = default;
    explicit FockState(int ports)
        : num_ports(ports), occupations(static_cast<std::size_t>(2 * ports), 0) {}

    int& at(int port, Pol pol) {
        return occupations[static_cast<std::size_t>(2 * port + static_cast<int>(pol))];
    }
    int at(int port, Pol pol) const {
        return occupations[static_cast<std::size_t>(2 * port + static_cast<int>(pol))];
    }

    int total() const;
    int total(Pol pol) const;

    /// Per-port totals (H + V summed), port identity retained.
    std::vector<int> port_counts() const;

    /// One particle per port: port i carries H if bit (num_ports-1-i) of
    /// `bits` is clear, V if set (matching the qubit computational basis).
    static FockState one_per_port(int ports, std::size_t bits);

    bool operator==(const FockState&) const = default;
};

/// Per-port particle counts of an output event. The vector retains port
/// identity (there are C(2N-1, N) distinct ones for N bosons); pattern()
/// gives the sorted shape used for reporting.
struct PortSignature {
    std::vector<int> counts;

    /// Non-increasing counts with zeros dropped.
    std::vector<int> pattern() const;

    auto operator<=>(const PortSignature&) const = default;
};

/// All occupation vectors of `particles` particles over `modes` modes,
/// in colexicographic order. cap_per_mode = 1 restricts to fermion-valid ones.
std::vector<std::vector<int>> enumerate_occupations(int modes, int particles,
                                                    int cap_per_mode = -1);

} // namespace qmetro
