// environment.cpp — Memory kernels, memory coefficients and transforms

#include "pbgfluor/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pbgfluor/error.hpp"

namespace pbgfluor::environment {

namespace {

using std::numbers::pi;

Error env_error(const std::string& msg) { return Error("environment", msg); }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

cplx base_value(const CorrelationKernel::Variant& v, double tau) {
    return std::visit(
        overloaded{
            [](const MarkovKernel&) -> cplx {
                throw env_error("the Markov kernel is a delta function and cannot be sampled; "
                                "use the analytic Markov path");
            },
            [tau](const PeriodicBand3DKernel& k) -> cplx {
                const double j0 = std::cyl_bessel_j(0.0, k.half_width * tau / 3.0);
                return k.coupling * k.coupling * j0 * j0 * j0 * std::polar(1.0, -k.center * tau);
            },
            [tau](const ParabolicEdgeKernel& k) -> cplx {
                const double t = std::max(tau, k.tau_min);
                return k.sqrt_beta * std::polar(1.0, pi / 4.0 - k.edge * t) / (t * std::sqrt(t));
            },
            [tau](const TabulatedKernel& k) -> cplx {
                const double x = tau / k.step;
                const auto i = static_cast<std::size_t>(x);
                if (i + 1 >= k.values.size()) {
                    return i + 1 == k.values.size() && x == static_cast<double>(i) ? k.values.back() : cplx{};
                }
                const double f = x - static_cast<double>(i);
                return (1.0 - f) * k.values[i] + f * k.values[i + 1];
            },
        },
        v);
}

} // namespace

CorrelationKernel CorrelationKernel::markov(double rate) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw env_error("Markov rate must be finite and >= 0");
    }
    return CorrelationKernel(MarkovKernel{rate});
}

CorrelationKernel CorrelationKernel::periodic_band_3d(double coupling, double center, double half_width) {
    if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
        throw env_error("band coupling g3D must be finite and >= 0");
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width) || !std::isfinite(center)) {
        throw env_error("band half-width B must be > 0 and the center finite");
    }
    return CorrelationKernel(PeriodicBand3DKernel{coupling, center, half_width});
}

CorrelationKernel CorrelationKernel::parabolic_edge(double sqrt_beta, double edge, double tau_min) {
    if (!(sqrt_beta >= 0.0) || !std::isfinite(sqrt_beta) || !std::isfinite(edge)) {
        throw env_error("parabolic edge needs finite sqrt(beta) >= 0 and a finite edge frequency");
    }
    if (!(tau_min > 0.0)) {
        throw env_error("parabolic edge tau_min must be > 0");
    }
    return CorrelationKernel(ParabolicEdgeKernel{sqrt_beta, edge, tau_min});
}

CorrelationKernel CorrelationKernel::parabolic_from_band(double coupling, double half_width, double edge,
                                                         double tau_min) {
    if (!(half_width > 0.0)) {
        throw env_error("band half-width B must be > 0");
    }
    const double r = 6.0 / half_width;
    return parabolic_edge(coupling * coupling * r * std::sqrt(r) / 8.0, edge, tau_min);
}

CorrelationKernel CorrelationKernel::tabulated(double step, std::vector<cplx> values) {
    if (!(step > 0.0) || values.size() < 2) {
        throw env_error("tabulated kernel needs step > 0 and at least two samples");
    }
    for (const auto& v : values) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw env_error("tabulated kernel values must be finite");
        }
    }
    return CorrelationKernel(TabulatedKernel{step, std::move(values)});
}

CorrelationKernel CorrelationKernel::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw env_error("cannot open kernel table " + path.string());
    }
    std::string line;
    std::getline(in, line); // header
    std::vector<double> taus;
    std::vector<cplx> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double t = 0, re = 0, im = 0;
        if (!(row >> t >> re >> im)) {
            throw env_error(path.string() + ":" + std::to_string(lineno) + ": expected tau,re,im");
        }
        taus.push_back(t);
        values.emplace_back(re, im);
    }
    if (taus.size() < 2) {
        throw env_error(path.string() + ": kernel table needs at least two rows");
    }
    if (std::abs(taus.front()) > 1e-12) {
        throw env_error(path.string() + ": kernel table must start at tau = 0");
    }
    const double step = taus[1] - taus[0];
    for (std::size_t i = 1; i < taus.size(); ++i) {
        if (std::abs((taus[i] - taus[i - 1]) - step) > 1e-6 * step) {
            throw env_error(path.string() + ": non-uniform tau spacing at row " + std::to_string(i + 2));
        }
    }
    return tabulated(step, std::move(values));
}

std::string_view CorrelationKernel::variant_name() const noexcept {
    switch (kernel_.index()) {
    case 0: return "markov";
    case 1: return "periodic_band_3d";
    case 2: return "parabolic_edge";
    default: return "tabulated";
    }
}

double CorrelationKernel::markov_rate() const {
    if (!is_markov()) {
        throw env_error("markov_rate() called on a non-Markov kernel");
    }
    return std::get<MarkovKernel>(kernel_).rate;
}

CorrelationKernel CorrelationKernel::with_frame_shift(double shift) const {
    CorrelationKernel k = *this;
    k.frame_shift_ = shift;
    return k;
}

cplx CorrelationKernel::evaluate(double tau) const {
    if (!(tau >= 0.0)) {
        throw env_error("kernel evaluated at negative tau");
    }
    const cplx v = base_value(kernel_, tau);
    return frame_shift_ == 0.0 ? v : v * std::polar(1.0, frame_shift_ * tau);
}

double CorrelationKernel::bandwidth_rate() const noexcept {
    return std::visit(
        overloaded{
            [](const MarkovKernel&) { return 0.0; },
            [this](const PeriodicBand3DKernel& k) { return std::abs(k.center - frame_shift_) + k.half_width; },
            [this](const ParabolicEdgeKernel& k) { return std::abs(k.edge - frame_shift_) + 1.0 / k.tau_min; },
            [this](const TabulatedKernel& k) { return std::abs(frame_shift_) + pi / k.step; },
        },
        kernel_);
}

cplx evaluate_kernel(const CorrelationKernel& k, double tau) { return k.evaluate(tau); }

MemoryAccumulator::MemoryAccumulator(const CorrelationKernel& k, double phase, double dt)
    : kernel_(&k), phase_(phase), dt_(dt) {
    if (k.is_markov()) {
        value_ = k.markov_rate();
    } else {
        last_sample_ = k.evaluate(0.0);
    }
}

void MemoryAccumulator::advance() {
    ++step_;
    if (kernel_->is_markov()) {
        return;
    }
    const double tau = static_cast<double>(step_) * dt_;
    const cplx sample = kernel_->evaluate(tau) * std::polar(1.0, phase_ * tau);
    value_ += 0.5 * dt_ * (last_sample_ + sample);
    last_sample_ = sample;
}

cplx memory_coefficient(const CorrelationKernel& k, double phase, double t, const TimeGrid& grid) {
    const std::size_t n = grid.index_of(t);
    if (k.is_markov()) {
        return k.markov_rate();
    }
    if (n == 0) {
        return {};
    }
    const double dt = grid.dt();
    cplx sum{};
    for (std::size_t i = 0; i <= n; ++i) {
        const double tau = static_cast<double>(i) * dt;
        const double w = (i == 0 || i == n) ? 0.5 * dt : dt;
        sum += w * k.evaluate(tau) * std::polar(1.0, phase * tau);
    }
    return sum;
}

const std::vector<cplx>& MemoryTable::at_phase(double phase) const {
    for (std::size_t j = 0; j < phases.size(); ++j) {
        if (phases[j] == phase) {
            return values[j];
        }
    }
    throw env_error("memory table has no entry for the requested phase");
}

MemoryTable build_memory_table(const CorrelationKernel& k, std::span<const double> phases, const TimeGrid& grid) {
    MemoryTable table;
    table.phases.assign(phases.begin(), phases.end());
    table.values.assign(phases.size(), std::vector<cplx>(grid.size()));
    if (k.is_markov()) {
        for (auto& v : table.values) {
            std::fill(v.begin(), v.end(), cplx(k.markov_rate()));
        }
        return table;
    }
    const double dt = grid.dt();
    std::vector<cplx> last(phases.size());
    const cplx a0 = k.evaluate(0.0);
    for (std::size_t j = 0; j < phases.size(); ++j) {
        last[j] = a0;
        table.values[j][0] = 0.0;
    }
    for (std::size_t n = 1; n < grid.size(); ++n) {
        const double tau = static_cast<double>(n) * dt;
        const cplx a = k.evaluate(tau);
        for (std::size_t j = 0; j < phases.size(); ++j) {
            const cplx sample = a * std::polar(1.0, phases[j] * tau);
            table.values[j][n] = table.values[j][n - 1] + 0.5 * dt * (last[j] + sample);
            last[j] = sample;
        }
    }
    return table;
}

LaplaceResult kernel_laplace(const CorrelationKernel& k, double omega, const LaplaceOptions& opt) {
    const double w[1] = {omega};
    return kernel_laplace(k, std::span<const double>(w, 1), opt).front();
}

std::vector<LaplaceResult> kernel_laplace(const CorrelationKernel& k, std::span<const double> omegas,
                                          const LaplaceOptions& opt) {
    std::vector<LaplaceResult> out(omegas.size());
    if (k.is_markov()) {
        for (auto& r : out) r.value = k.markov_rate();
        return out;
    }
    if (!(opt.window > 0.0) || !(opt.step > 0.0)) {
        throw env_error("Laplace window and step must be > 0");
    }
    const auto n = static_cast<std::size_t>(std::ceil(opt.window / opt.step));
    const double h = opt.window / static_cast<double>(n);
    const double eta = opt.infinite ? 4.0 / opt.window : 0.0;
    const std::size_t check = n - n / 10;

    std::vector<cplx> samples(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double tau = static_cast<double>(i) * h;
        const double wt = (i == 0 || i == n) ? 0.5 * h : h;
        samples[i] = wt * std::exp(-eta * tau) * k.evaluate(tau);
    }
    for (std::size_t m = 0; m < omegas.size(); ++m) {
        const cplx step_phase = std::polar(1.0, omegas[m] * h);
        cplx phasor = 1.0;
        cplx sum{};
        cplx at_check{};
        for (std::size_t i = 0; i <= n; ++i) {
            if ((i & 1023u) == 0) {
                phasor = std::polar(1.0, omegas[m] * h * static_cast<double>(i));
            }
            if (i == check) {
                // running integral at 0.9 T, with the trapezoid endpoint correction
                at_check = sum + 0.5 * samples[i] * phasor;
            }
            sum += samples[i] * phasor;
            phasor *= step_phase;
        }
        LaplaceResult& r = out[m];
        r.value = sum;
        r.tail_change = std::abs(sum) > 0.0 ? std::abs(sum - at_check) / std::abs(sum) : 0.0;
        r.converged = r.tail_change <= opt.tolerance;
    }
    return out;
}

std::vector<double> spectral_density_check(const CorrelationKernel& k, std::span<const double> omegas,
                                           double window, double step) {
    if (k.is_markov()) {
        return std::vector<double>(omegas.size(), k.markov_rate() / (2.0 * pi));
    }
    if (omegas.size() >= 2) {
        double spacing = std::abs(omegas[1] - omegas[0]);
        for (std::size_t i = 2; i < omegas.size(); ++i) {
            spacing = std::min(spacing, std::abs(omegas[i] - omegas[i - 1]));
        }
        if (spacing > 0.0 && window < 2.0 * pi / spacing) {
            std::ostringstream os;
            os << "window " << window << " too short for frequency spacing " << spacing
               << " (needs >= " << 2.0 * pi / spacing << ")";
            throw env_error(os.str());
        }
    }
    LaplaceOptions opt;
    opt.window = window;
    opt.step = step;
    opt.infinite = true;
    const auto lt = kernel_laplace(k, omegas, opt);
    std::vector<double> rho(omegas.size());
    for (std::size_t i = 0; i < lt.size(); ++i) {
        rho[i] = lt[i].value.real() / pi;
    }
    return rho;
}

cplx q_constant(double gamma, double lattice_period, std::span<const SymmetryPoint> points,
                const Eigen::Vector3d& displacement) {
    if (points.empty()) {
        throw env_error("q_constant needs at least one symmetry point k0");
    }
    if (!(displacement.norm() > 0.0)) {
        throw env_error("q_constant needs a non-zero atom-detector displacement");
    }
    const double scale = gamma * std::pow(lattice_period / (2.0 * pi), 3);
    cplx sum{};
    for (const auto& p : points) {
        const double s1 = std::sin(p.theta);
        const double s2 = std::sin(p.theta_detector);
        sum += std::polar(1.0, p.k0.dot(displacement)) * (s1 * s1 * s2 * s2);
    }
    return scale * sum;
}

SpatialKernelTransform::SpatialKernelTransform(cplx q, double curvature, double edge, double distance)
    : q_(q), curvature_(curvature), edge_(edge), distance_(distance) {
    if (!(distance > 0.0) || !std::isfinite(distance)) {
        throw env_error("spatial.d > 0 required (atom-detector distance)");
    }
    if (!(curvature > 0.0) || !std::isfinite(curvature)) {
        throw env_error("spatial.curvature > 0 required");
    }
}

double SpatialKernelTransform::localization_length(double omega) const {
    const double gap = std::abs(omega - edge_);
    return gap == 0.0 ? std::numeric_limits<double>::infinity() : std::sqrt(curvature_ / gap);
}

cplx SpatialKernelTransform::evaluate(double omega) const {
    const cplx prefactor = q_ * (2.0 * pi * pi) / (cplx(0.0, 1.0) * distance_ * curvature_);
    if (omega == edge_) {
        return prefactor;
    }
    const double x = distance_ * std::sqrt(std::abs(omega - edge_) / curvature_);
    return omega < edge_ ? prefactor * std::exp(-x) : prefactor * std::polar(1.0, -x);
}

SpatialKernelTransform SpatialKernelTransform::at_distance(double distance) const {
    return SpatialKernelTransform(q_, curvature_, edge_, distance);
}

std::string SpatialKernelTransform::far_field_warning() const {
    if (distance_ >= far_field_floor) {
        return {};
    }
    std::ostringstream os;
    os << "d = " << distance_ << " is below the far-field floor of " << far_field_floor
       << " lattice periods; the detector kernel assumes a distant detector";
    return os.str();
}

cplx spatial_kernel_ft(const SpatialKernelTransform& s, double omega) { return s.evaluate(omega); }

} // namespace pbgfluor::environment
