#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <tsplp/instance.hpp>

namespace tsplp::fixtures {

inline Tour random_tour(int n, std::mt19937_64& rng) {
    Tour t;
    t.order.resize(static_cast<std::size_t>(n - 1));
    std::iota(t.order.begin(), t.order.end(), 1);
    std::shuffle(t.order.begin(), t.order.end(), rng);
    return t;
}

inline std::vector<Tour> all_tours(int n) {
    std::vector<Tour> out;
    Tour t;
    t.order.resize(static_cast<std::size_t>(n - 1));
    std::iota(t.order.begin(), t.order.end(), 1);
    do out.push_back(t);
    while (std::next_permutation(t.order.begin(), t.order.end()));
    return out;
}

inline TspInstance constant_instance(int n, double c) {
    return {n, std::vector<double>(static_cast<std::size_t>(n) * n, c)};
}

inline TspInstance random_integer_instance(int n, std::uint64_t seed, bool symmetric = true) {
    GenConfig g;
    g.n = n;
    g.seed = seed;
    g.integer = true;
    g.symmetric = symmetric;
    return generate_random(g);
}

}  // namespace tsplp::fixtures
