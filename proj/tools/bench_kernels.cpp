// Timing comparison of the OpenMP kernels against their serial reference:
// 2-D FFT propagation, the Monte-Carlo telegraph oracle, and a sweep of
// Ramsey evolutions dispatched like the CLI worker pool.

#include <chrono>
#include <cstdio>
#include <vector>

#include "aqm/detection.hpp"
#include "aqm/fft.hpp"
#include "aqm/parallel.hpp"
#include "aqm/protocols.hpp"
#include "aqm/rng.hpp"

using namespace aqm;

namespace {

double seconds(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double timeit(F&& fn, int repeats = 3) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, seconds(t0, t1));
    }
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name,
                serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
    std::printf("threads available: %d\n\n", max_threads());

    {
        const int n = 1024;
        Rng rng(1);
        fft::Grid base(n, n);
        for (auto& z : base.data) z = {rng.normal(), rng.normal()};
        double ts = timeit([&] {
            fft::Grid g = base;
            fft::fft2d(g, false, ExecMode::Serial);
        });
        double tp = timeit([&] {
            fft::Grid g = base;
            fft::fft2d(g, false, ExecMode::Parallel);
        });
        report("fft2d 1024x1024", ts, tp);
    }

    {
        detection::DetectionModel m;
        const long trials = 1000000;
        double ts = timeit(
            [&] { detection::telegraph_no_photon_probability(m, 11e-6, true, trials, 7,
                                                             ExecMode::Serial); });
        double tp = timeit(
            [&] { detection::telegraph_no_photon_probability(m, 11e-6, true, trials, 7,
                                                             ExecMode::Parallel); });
        report("telegraph MC 1e6 trials", ts, tp);
    }

    {
        // a Ramsey intensity sweep, dispatched row-by-row like the CLI pool
        std::vector<double> intensities;
        for (int i = 0; i < 12; ++i) intensities.push_back(1e-4 + 2e-4 * i);
        auto run_rows = [&](bool parallel) {
            std::vector<double> t2(intensities.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
            for (long i = 0; i < long(intensities.size()); ++i) {
                protocols::RamseyConfig cfg;
                cfg.probe = lindblad::ProbeBeam::detection(intensities[size_t(i)]);
                double gamma = lindblad::weak_probe_gamma(cfg.probe, {}).total;
                for (int k = 1; k <= 12; ++k) cfg.wait_grid.push_back(2.0 / gamma * k / 12.0);
                t2[size_t(i)] = protocols::simulate_ramsey(cfg).t2_star;
            }
            return t2;
        };
        double ts = timeit([&] { run_rows(false); }, 2);
        double tp = timeit([&] { run_rows(true); }, 2);
        report("ramsey sweep (12 rows)", ts, tp);
    }

    return 0;
}
