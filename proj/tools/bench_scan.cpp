#include "trapstab/scan.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <cstdio>
#include <cstring>

using namespace trapstab;

namespace {

bool identical(const ScanResult& lhs, const ScanResult& rhs) {
    return lhs.verdicts == rhs.verdicts && lhs.flags == rhs.flags &&
           std::memcmp(lhs.traces.data(), rhs.traces.data(),
                       lhs.traces.size() * sizeof(double)) == 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compare the serial and OpenMP scan kernels"};
    int nx = 120;
    int ny = 120;
    int threads = 0;
    std::string method = "trace-forced";
    app.add_option("--nx", nx, "Grid cells along q");
    app.add_option("--ny", ny, "Grid cells along a");
    app.add_option("--threads", threads, "Worker threads (0 = all)");
    app.add_option("--method", method, "trace, trace-forced, or bounded")
        ->check(CLI::IsMember({"trace", "trace-forced", "bounded"}));
    CLI11_PARSE(app, argc, argv);

    GridSpec grid = GridSpec::stability_default();
    grid.nx = nx;
    grid.ny = ny;

    const double omega = 1e8;
    CslParams csl; // lambda = 0: the classification kernel itself is the subject
    const MonodromyPolicy policy = MonodromyPolicy::defaults(omega);
    const IntegratorSettings settings;

    ScanOptions options;
    options.threads = threads;
    if (method == "trace") {
        options.method = ScanMethod::TraceHomogeneous;
    } else if (method == "bounded") {
        options.method = ScanMethod::Boundedness;
        options.bounded_periods = 20;
    }

    std::printf("grid %d x %d, method %s\n", nx, ny, method.c_str());

    ScanOptions serial = options;
    serial.serial_reference = true;
    const double t0 = omp_get_wtime();
    const ScanResult ref = scan_aq(grid, csl, omega, policy, settings, serial);
    const double t1 = omp_get_wtime();
    const double serial_s = t1 - t0;
    std::printf("serial reference: %8.3f s\n", serial_s);

    const int used = threads > 0 ? threads : omp_get_max_threads();
    const double t2 = omp_get_wtime();
    const ScanResult par = scan_aq(grid, csl, omega, policy, settings, options);
    const double t3 = omp_get_wtime();
    const double parallel_s = t3 - t2;
    std::printf("parallel (%d threads): %8.3f s\n", used, parallel_s);
    std::printf("speedup: %.2fx\n", parallel_s > 0.0 ? serial_s / parallel_s : 0.0);

    if (!identical(ref, par)) {
        std::printf("MISMATCH: parallel result differs from serial reference\n");
        return 1;
    }
    std::printf("results identical\n");
    return 0;
}
