#include "mutomo/musr.hpp"

#include "mutomo/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

namespace mutomo {

namespace {

constexpr double pi = std::numbers::pi;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint32_t tag) {
    std::seed_seq seq {std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream), std::uint32_t(stream >> 32), tag};
    return std::mt19937_64(seq);
}

// direction with cos(angle to p) distributed as (1 + q c)/2
Vec3 sample_emission(const Vec3& p, double q, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double u = U(rng), phi = 2 * pi * U(rng);
    double c;
    if (q < 1e-15) {
        c = 2 * u - 1;
    } else {
        const double k = 2 - q - 4 * u;
        c = -k / (1 + std::sqrt(std::max(0.0, 1 - q * k)));
    }
    c = std::clamp(c, -1.0, 1.0);
    const double s = std::sqrt(1 - c * c);
    // frame around p
    Vec3 e3 = p;
    Vec3 a = std::abs(e3(0)) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    Vec3 e1 = a.cross(e3).normalized();
    Vec3 e2 = e3.cross(e1);
    return c * e3 + s * std::cos(phi) * e1 + s * std::sin(phi) * e2;
}

double decay_weight(double t0, double t1, double tau) { return tau * (std::exp(-t0 / tau) - std::exp(-t1 / tau)); }

// w(+1/2) without the range check
double w_plus_of(double gamma, double a, Species s) {
    const double d = (gamma - 1) / (2 * a);
    return s == Species::MuPlus ? 0.5 + d : 0.5 - d;
}

}  // namespace

void DecayModel::validate() const {
    if (!(asymmetry >= 0 && asymmetry <= 1)) throw ValidationError("DecayModel: asymmetry must lie in [0, 1]");
    if (!(lifetime_ns > 0)) throw ValidationError("DecayModel: lifetime must be positive");
}

void DetectorGeometry::validate() const {
    if (detectors.empty()) throw ValidationError("DetectorGeometry: no detectors");
    for (const auto& d : detectors) {
        if (!(d.half_angle > 0 && d.half_angle <= pi)) throw ValidationError("DetectorGeometry: half-angle must lie in (0, pi]");
        if (!(d.efficiency > 0 && d.efficiency <= 1)) throw ValidationError("DetectorGeometry: efficiency must lie in (0, 1]");
        if (std::abs(d.axis.n.norm() - 1) > 1e-9) throw ValidationError("DetectorGeometry: axis must be a unit vector");
    }
}

DetectorGeometry DetectorGeometry::six_cones(double half_angle, double efficiency) {
    DetectorGeometry g;
    for (int k = 0; k < 3; ++k)
        for (double s : {1.0, -1.0}) {
            Vec3 v = Vec3::Zero();
            v(k) = s;
            g.detectors.push_back({Direction::from_vector(v), half_angle, efficiency});
        }
    g.validate();
    return g;
}

DetectorGeometry DetectorGeometry::full_sphere() { return {{{Direction::z(), pi, 1.0}}}; }

std::vector<std::pair<std::size_t, std::size_t>> DetectorGeometry::opposite_pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::vector<bool> used(detectors.size(), false);
    for (std::size_t i = 0; i < detectors.size(); ++i) {
        if (used[i]) continue;
        for (std::size_t j = i + 1; j < detectors.size(); ++j) {
            if (used[j]) continue;
            if ((detectors[i].axis.n + detectors[j].axis.n).norm() < 1e-9 &&
                std::abs(detectors[i].half_angle - detectors[j].half_angle) < 1e-12) {
                out.emplace_back(i, j);
                used[i] = used[j] = true;
                break;
            }
        }
    }
    return out;
}

void HistogramSeries::validate() const {
    if (edges.size() < 2) throw ValidationError("HistogramSeries: need at least one bin");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw ValidationError("HistogramSeries: bin edges must be strictly increasing");
    for (const auto& c : counts)
        if (c.size() != bins()) throw ValidationError("HistogramSeries: count array length does not match bins");
    if (!(background_fraction >= 0 && background_fraction < 1)) throw ValidationError("HistogramSeries: background fraction must lie in [0, 1)");
}

double gamma_distribution(const Vec3& P, const Direction& n, double a) {
    if (!(P.norm() <= 1 + 1e-12)) throw ValidationError("gamma_distribution: |P| > 1");
    if (!(a >= 0 && a <= 1)) throw ValidationError("gamma_distribution: asymmetry must lie in [0, 1]");
    return 1 + a * P.dot(n.n);
}

std::pair<double, double> histogram_to_tomogram(double gamma_value, double a, Species species) {
    if (!(a > 0 && a <= 1)) throw ValidationError("histogram_to_tomogram: asymmetry must lie in (0, 1]");
    const double wp = w_plus_of(gamma_value, a, species);
    constexpr double eps = 1e-6;
    if (!(wp >= -eps && wp <= 1 + eps)) throw NumericError("histogram_to_tomogram: Gamma out of range for this asymmetry");
    return {wp, 1 - wp};
}

Vec3 polarization(const ComplexMatrix& rho) {
    if (rho.rows() != 2 || rho.cols() != 2) throw ValidationError("polarization: expected a 2x2 muon state");
    return Vec3(2 * rho(0, 1).real(), -2 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real());
}

PolarizationFn polarization_of(std::function<ComplexMatrix(double)> rho_mu_of_t) {
    return [f = std::move(rho_mu_of_t)](double t) { return polarization(f(t)); };
}

PolarizationFn polarization_from_hamiltonian(const ComplexMatrix& rho0, const ComplexMatrix& h, SubsystemDims dims) {
    if (dims.dimA != 2 || rho0.rows() != dims.total() || h.rows() != dims.total())
        throw ValidationError("polarization_from_hamiltonian: dimension mismatch");
    auto eig = eig_hermitian(h);
    const ComplexMatrix& v = eig.vectors;
    const ComplexMatrix r = v.adjoint() * rho0 * v;
    const ComplexMatrix idB = ComplexMatrix::Identity(dims.dimB, dims.dimB);
    struct Term {
        double w;
        cplx c[3];
    };
    Vec3 constant = Vec3::Zero();
    std::vector<Term> terms;
    ComplexMatrix o[3];
    for (int k = 0; k < 3; ++k) o[k] = v.adjoint() * kron(pauli(k + 1), idB) * v;
    const int n = static_cast<int>(h.rows());
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) constant(k) += (r(i, i) * o[k](i, i)).real();
        for (int j = i + 1; j < n; ++j) {
            Term t {eig.values(i) - eig.values(j), {}};
            for (int k = 0; k < 3; ++k) t.c[k] = 2.0 * r(i, j) * o[k](j, i);
            terms.push_back(t);
        }
    }
    return [constant, terms](double t) {
        Vec3 p = constant;
        for (const auto& term : terms) {
            const cplx e = std::polar(1.0, -term.w * t);
            for (int k = 0; k < 3; ++k) p(k) += (term.c[k] * e).real();
        }
        return p;
    };
}

std::vector<double> uniform_edges(double t_max_ns, std::size_t bins) {
    if (!(t_max_ns > 0) || bins == 0) throw ValidationError("uniform_edges: need t_max > 0 and at least one bin");
    std::vector<double> e(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) e[i] = t_max_ns * double(i) / double(bins);
    return e;
}

HistogramSeries simulate_events(const PolarizationFn& P, const DetectorGeometry& geometry, const DecayModel& model,
                                std::uint64_t n_muons, std::uint64_t seed, const SimulationOptions& opt) {
    model.validate();
    geometry.validate();
    if (n_muons < 1) throw ValidationError("simulate_events: need at least one muon");
    if (opt.chunk < 1) throw ValidationError("simulate_events: chunk must be positive");
    HistogramSeries hist;
    hist.edges = opt.edges;
    hist.n_muons = n_muons;
    hist.background_fraction = opt.background_fraction;
    hist.seed = seed;
    hist.counts.assign(geometry.detectors.size(), std::vector<std::uint64_t>(opt.edges.size() > 1 ? opt.edges.size() - 1 : 0, 0));
    hist.validate();

    const std::size_t nd = geometry.detectors.size(), nb = hist.bins();
    std::vector<double> cos_cone(nd);
    for (std::size_t d = 0; d < nd; ++d) cos_cone[d] = std::cos(geometry.detectors[d].half_angle);
    const double sign = model.species == Species::MuPlus ? 1.0 : -1.0;
    const double t_lo = hist.edges.front(), t_hi = hist.edges.back();

    const std::uint64_t n_chunks = (n_muons + opt.chunk - 1) / opt.chunk;
    std::atomic<std::uint64_t> next {0};
    auto worker = [&](std::vector<std::uint64_t>& local) {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (std::uint64_t c = next++; c < n_chunks; c = next++) {
            auto rng = stream_rng(seed, c, 0x6d75);
            std::exponential_distribution<double> decay(1.0 / model.lifetime_ns);
            const std::uint64_t begin = c * opt.chunk, end = std::min<std::uint64_t>(n_muons, begin + opt.chunk);
            for (std::uint64_t m = begin; m < end; ++m) {
                const double t = decay(rng);
                Vec3 p = sign * P(t);
                const double pn = p.norm();
                const double q = model.asymmetry * std::min(pn, 1.0);
                Vec3 n = sample_emission(pn > 0 ? Vec3(p / pn) : Vec3(0, 0, 1), q, rng);
                if (t < t_lo || t >= t_hi) continue;
                for (std::size_t d = 0; d < nd; ++d) {
                    const auto& det = geometry.detectors[d];
                    if (n.dot(det.axis.n) < cos_cone[d]) continue;
                    if (det.efficiency < 1 && U(rng) >= det.efficiency) break;
                    const auto b = std::upper_bound(hist.edges.begin(), hist.edges.end(), t) - hist.edges.begin() - 1;
                    ++local[d * nb + b];
                    break;
                }
            }
        }
    };
    unsigned nt = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    nt = static_cast<unsigned>(std::min<std::uint64_t>(nt, n_chunks));
    std::vector<std::vector<std::uint64_t>> partial(nt, std::vector<std::uint64_t>(nd * nb, 0));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < nt; ++i) pool.emplace_back(worker, std::ref(partial[i]));
    worker(partial[0]);
    for (auto& th : pool) th.join();
    for (const auto& p : partial)
        for (std::size_t d = 0; d < nd; ++d)
            for (std::size_t b = 0; b < nb; ++b) hist.counts[d][b] += p[d * nb + b];

    // flat background, uniform over detectors
    if (opt.background_fraction > 0) {
        auto rng = stream_rng(seed, n_chunks, 0x6267);
        std::poisson_distribution<std::uint64_t> pois(opt.background_fraction * double(n_muons));
        std::uniform_real_distribution<double> tu(t_lo, t_hi);
        std::uniform_int_distribution<std::size_t> du(0, nd - 1);
        const std::uint64_t nbg = pois(rng);
        for (std::uint64_t i = 0; i < nbg; ++i) {
            const double t = tu(rng);
            const std::size_t d = du(rng);
            const auto b = std::upper_bound(hist.edges.begin(), hist.edges.end(), t) - hist.edges.begin() - 1;
            ++hist.counts[d][std::min<std::size_t>(b, nb - 1)];
        }
    }
    return hist;
}

std::vector<TomogramEstimate> estimate_tomogram(const HistogramSeries& hist, const DetectorGeometry& geometry,
                                                const DecayModel& model, std::uint64_t count_floor) {
    hist.validate();
    geometry.validate();
    model.validate();
    if (!(model.asymmetry > 0)) throw ValidationError("estimate_tomogram: asymmetry must be positive");
    if (hist.counts.size() != geometry.detectors.size()) throw ValidationError("estimate_tomogram: detector count mismatch");
    const auto pairs = geometry.opposite_pairs();
    if (pairs.empty()) throw ValidationError("estimate_tomogram: geometry has no opposite detector pairs");
    const std::size_t nb = hist.bins();
    std::vector<TomogramEstimate> out;
    bool any_ok = false;
    for (auto [fi, bi] : pairs) {
        const auto& df = geometry.detectors[fi];
        const auto& db = geometry.detectors[bi];
        const double ef = df.efficiency, eb = db.efficiency;
        const auto& F = hist.counts[fi];
        const auto& B = hist.counts[bi];

        // y_i = F/ef + B/eb = S E_i + beta dt_i
        Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
        Eigen::Vector2d aty = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < nb; ++i) {
            const double e = decay_weight(hist.edges[i], hist.edges[i + 1], model.lifetime_ns);
            const double dt = hist.edges[i + 1] - hist.edges[i];
            const double y = F[i] / ef + B[i] / eb;
            const double var = std::max(F[i] / (ef * ef) + B[i] / (eb * eb), 1.0);
            Eigen::Vector2d row(e, dt);
            ata += row * row.transpose() / var;
            aty += row * y / var;
        }
        double beta = 0;
        if (hist.background_fraction > 0 && std::abs(ata.determinant()) > 1e-300 * ata.norm())
            beta = std::max(0.0, ata.ldlt().solve(aty)(1));
        const double bg_rate = beta / (1 / ef + 1 / eb);

        const double k = (1 + std::cos(df.half_angle)) / 2;
        TomogramEstimate est;
        est.axis = df.axis;
        est.forward = fi;
        est.backward = bi;
        est.background_per_ns = bg_rate;
        for (std::size_t i = 0; i < nb; ++i) {
            const double dt = hist.edges[i + 1] - hist.edges[i];
            const double f = (F[i] - bg_rate * dt) / ef, b = (B[i] - bg_rate * dt) / eb;
            const double s = f + b;
            est.t_start.push_back(hist.edges[i]);
            est.t_end.push_back(hist.edges[i + 1]);
            est.counts.push_back(F[i] + B[i]);
            const bool low = F[i] + B[i] < count_floor || s <= 0;
            est.low_confidence.push_back(low);
            if (s <= 0) {
                est.w_plus.push_back(std::nan(""));
                est.sigma.push_back(std::nan(""));
                continue;
            }
            any_ok = any_ok || !low;
            const double A = (f - b) / s;
            const double gamma = 1 + A / k;
            est.w_plus.push_back(w_plus_of(gamma, model.asymmetry, model.species));
            const double varA = 4 * (b * b * F[i] / (ef * ef) + f * f * B[i] / (eb * eb)) / std::pow(s, 4);
            est.sigma.push_back(std::sqrt(varA) / (2 * model.asymmetry * k));
        }
        out.push_back(std::move(est));
    }
    if (!any_ok) throw NumericError("estimate_tomogram: every bin is below the count floor");
    return out;
}

double true_bin_tomogram(const PolarizationFn& P, const Direction& axis, double t0, double t1, double tau) {
    if (!(t1 > t0) || !(tau > 0)) throw ValidationError("true_bin_tomogram: bad interval");
    static thread_local std::vector<double> x, w;
    if (x.empty()) gauss_legendre(8, x, w);
    const int pieces = std::max(1, static_cast<int>(std::ceil((t1 - t0) / 1.0)));
    const double h = (t1 - t0) / pieces;
    double num = 0, den = 0;
    for (int p = 0; p < pieces; ++p)
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = t0 + h * (p + 0.5 * (x[i] + 1));
            const double wt = w[i] * std::exp(-t / tau);
            num += wt * 0.5 * (1 + P(t).dot(axis.n));
            den += wt;
        }
    return num / den;
}

nlohmann::json to_json(const DetectorGeometry& g) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& d : g.detectors)
        a.push_back({{"axis_theta", d.axis.theta}, {"axis_phi", d.axis.phi}, {"half_angle", d.half_angle}, {"efficiency", d.efficiency}});
    return a;
}

DetectorGeometry geometry_from_json(const nlohmann::json& j) {
    try {
        DetectorGeometry g;
        for (const auto& d : j)
            g.detectors.push_back({Direction::from_angles(d.at("axis_theta").get<double>(), d.at("axis_phi").get<double>()),
                                   d.at("half_angle").get<double>(), d.value("efficiency", 1.0)});
        g.validate();
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("detector geometry json: ") + e.what());
    }
}

void write_histogram(const HistogramSeries& h, const DetectorGeometry& g, const DecayModel& m, const std::string& csv_path,
                     const std::string& json_path) {
    h.validate();
    std::ofstream csv(csv_path);
    if (!csv) throw ValidationError("cannot write " + csv_path);
    csv << "# mutomo histogram v1\n";
    csv << "detector_id,axis_theta,axis_phi,bin_start_ns,bin_end_ns,counts\n";
    csv << std::setprecision(17);
    for (std::size_t d = 0; d < h.counts.size(); ++d)
        for (std::size_t b = 0; b < h.bins(); ++b)
            csv << d << ',' << g.detectors[d].axis.theta << ',' << g.detectors[d].axis.phi << ',' << h.edges[b] << ','
                << h.edges[b + 1] << ',' << h.counts[d][b] << '\n';
    nlohmann::json meta = {{"n_muons", h.n_muons},
                           {"seed", h.seed},
                           {"background_fraction", h.background_fraction},
                           {"asymmetry", m.asymmetry},
                           {"lifetime_ns", m.lifetime_ns},
                           {"species", m.species == Species::MuPlus ? "mu_plus" : "mu_minus"},
                           {"detectors", to_json(g)}};
    std::ofstream js(json_path);
    if (!js) throw ValidationError("cannot write " + json_path);
    js << meta.dump(2) << '\n';
}

HistogramFile read_histogram(const std::string& csv_path, const std::string& json_path) {
    HistogramFile f;
    std::ifstream js(json_path);
    if (!js) throw ValidationError("cannot read " + json_path);
    try {
        nlohmann::json meta;
        js >> meta;
        f.hist.n_muons = meta.at("n_muons").get<std::uint64_t>();
        f.hist.seed = meta.value("seed", std::uint64_t {0});
        f.hist.background_fraction = meta.at("background_fraction").get<double>();
        f.model.asymmetry = meta.at("asymmetry").get<double>();
        f.model.lifetime_ns = meta.at("lifetime_ns").get<double>();
        const auto sp = meta.value("species", std::string("mu_plus"));
        if (sp != "mu_plus" && sp != "mu_minus") throw ValidationError("histogram sidecar: unknown species " + sp);
        f.model.species = sp == "mu_plus" ? Species::MuPlus : Species::MuMinus;
        f.geometry = geometry_from_json(meta.at("detectors"));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("histogram sidecar: ") + e.what());
    }
    f.model.validate();

    std::ifstream csv(csv_path);
    if (!csv) throw ValidationError("cannot read " + csv_path);
    std::string line;
    const std::size_t nd = f.geometry.detectors.size();
    f.hist.counts.assign(nd, {});
    std::vector<std::vector<std::pair<double, double>>> bins(nd);
    bool header = false;
    while (std::getline(csv, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "detector_id,axis_theta,axis_phi,bin_start_ns,bin_end_ns,counts")
                throw ValidationError("histogram csv: unexpected header");
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> c;
        while (std::getline(ss, cell, ',')) c.push_back(cell);
        if (c.size() != 6) throw ValidationError("histogram csv: expected 6 columns");
        try {
            const std::size_t d = std::stoul(c[0]);
            if (d >= nd) throw ValidationError("histogram csv: detector id out of range");
            bins[d].emplace_back(std::stod(c[3]), std::stod(c[4]));
            f.hist.counts[d].push_back(std::stoull(c[5]));
        } catch (const std::logic_error&) {
            throw ValidationError("histogram csv: malformed row '" + line + "'");
        }
    }
    if (bins.empty() || bins[0].empty()) throw ValidationError("histogram csv: no rows");
    for (std::size_t d = 1; d < nd; ++d)
        if (bins[d] != bins[0]) throw ValidationError("histogram csv: detectors disagree on binning");
    for (std::size_t b = 0; b < bins[0].size(); ++b) {
        if (b > 0 && bins[0][b].first != bins[0][b - 1].second) throw ValidationError("histogram csv: bins not contiguous");
        f.hist.edges.push_back(bins[0][b].first);
    }
    f.hist.edges.push_back(bins[0].back().second);
    f.hist.validate();
    return f;
}

}  // namespace mutomo
