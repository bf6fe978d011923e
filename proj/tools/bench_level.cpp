// Rough per-level timing probe for the scan workload.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "lmcount/hecke.hpp"

using namespace lmcount;
using Clock = std::chrono::steady_clock;

static double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int main(int argc, char** argv) {
    std::uint32_t N = argc > 1 ? std::atoi(argv[1]) : 4965;
    std::uint32_t p = 101;
    auto t0 = Clock::now();
    ManinSpace s(N, p);
    std::printf("build space:      %8.1f ms  (P1 %zu, dim %zu)\n", ms_since(t0), s.p1().size(), s.dim());

    t0 = Clock::now();
    const Subspace& v = s.cuspidal_plus();
    std::printf("cuspidal plus:    %8.1f ms  (dim %zu)\n", ms_since(t0), v.dim());

    t0 = Clock::now();
    FpMatrix t2full = hecke_matrix(s, 2);
    std::printf("T2 on quotient:   %8.1f ms\n", ms_since(t0));

    t0 = Clock::now();
    FpMatrix t2 = restrict_operator(t2full, v);
    std::printf("restrict T2:      %8.1f ms\n", ms_since(t0));

    t0 = Clock::now();
    FpPoly chi = t2.charpoly();
    std::printf("charpoly:         %8.1f ms  (deg %d)\n", ms_since(t0), chi.degree());

    SpaceCache cache(p);
    t0 = Clock::now();
    Subspace nw = new_subspace(s, cache.getter());
    std::printf("new subspace:     %8.1f ms  (dim %zu)\n", ms_since(t0), nw.dim());

    t0 = Clock::now();
    ALDecomposition dec = al_eigenspaces(s, cache.getter());
    std::printf("al eigenspaces:   %8.1f ms\n", ms_since(t0));

    t0 = Clock::now();
    std::size_t total = 0;
    for (const Subspace& es : dec.eigenspaces) {
        if (es.dim() == 0) continue;
        FpPoly f = restrict_operator(t2full, es).charpoly();
        total += static_cast<std::size_t>(f.degree());
    }
    std::printf("chi charpolys:    %8.1f ms  (degrees sum %zu)\n", ms_since(t0), total);
    return 0;
}
