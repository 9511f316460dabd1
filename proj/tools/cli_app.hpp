#pragma once

// Command-line front end. Kept in a header so the test suite can drive it in-process.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fraclmi/demo.hpp"
#include "fraclmi/io.hpp"
#include "fraclmi/sim.hpp"
#include "fraclmi/stability.hpp"
#include "fraclmi/synthesis.hpp"

namespace fraclmi::cli {

namespace fs = std::filesystem;
using io::json;

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kPrecondition = 2,
    kUnstable = 3,
    kInfeasible = 4,
    kVerificationFailed = 5,
    kSolverFailure = 6,
    kVerifiedInexact = 7,  // feasible and verified, but controller recovery was inexact
};

struct Context {
    std::ostream& out;
    std::ostream& err;
};

// ---- shared helpers -------------------------------------------------------

inline std::string backend_name(const std::string& flag) {
    std::string name = flag;
    if (name.empty()) {
        const char* env = std::getenv("FRACLMI_SOLVER");
        name = env ? env : "ipm";
    }
    if (name != "ipm") throw ParseError("unknown solver backend '" + name + "' (available: ipm)");
    return name;
}

inline Vector parse_vector(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError("cannot parse '" + item + "' as a number");
        }
    }
    return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Pads with zeros (controller states start at rest); longer vectors are rejected.
inline Vector initial_state(const Vector& given, Eigen::Index dim) {
    if (given.size() > dim) {
        throw DimensionError("initial state has " + std::to_string(given.size()) + " entries; closed loop has " +
                             std::to_string(dim) + " states");
    }
    Vector x0 = Vector::Zero(dim);
    x0.head(given.size()) = given;
    return x0;
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ParseError("cannot create output directory " + dir + ": " + ec.message());
}

inline std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

inline void write_manifest(const std::string& dir, const std::string& command, const std::string& input,
                           const json& options, std::uint64_t seed) {
    json m{{"command", command},
           {"input", input},
           {"options", options},
           {"outputDir", dir},
           {"seed", seed},
           {"version", kVersion}};
    io::write_json(join(dir, "manifest.json"), m);
}

inline std::string index_label(const std::string& prefix, std::size_t i) {
    std::ostringstream os;
    os << prefix << std::setw(2) << std::setfill('0') << i;
    return os.str();
}

struct LabeledRealization {
    std::string label;
    UncertaintyRealization realization;
};

// Nominal plus every vertex (when the vertex count is reasonable).
inline std::vector<LabeledRealization> nominal_and_vertices(const UncertaintyModel& u, std::size_t maxParams,
                                                            std::vector<std::string>* notes = nullptr) {
    std::vector<LabeledRealization> out{{"nominal", nominal_realization(u)}};
    if (u.certain()) return out;
    if (u.p() + u.q() > maxParams) {
        if (notes) notes->push_back("vertex enumeration skipped: too many uncertain parameters");
        return out;
    }
    const auto verts = sample_vertices(u, maxParams);
    for (std::size_t i = 0; i < verts.size(); ++i) out.push_back({index_label("vertex_", i), verts[i]});
    return out;
}

inline void write_spectrum_file(const std::string& path, const SpectrumReport& r) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot write " + path);
    write_spectrum_csv(os, r);
}

// Two rays from the origin at +-alpha*pi/2, sampled out to `radius`.
inline void write_boundary_rays(const std::string& path, double alpha, double radius) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot write " + path);
    os << "ray,Re,Im\n";
    os.precision(12);
    const double phi = alpha * kPi / 2.0;
    for (int sign : {1, -1}) {
        for (int k = 0; k <= 20; ++k) {
            const double r = radius * k / 20.0;
            os << (sign > 0 ? "upper" : "lower") << "," << r * std::cos(phi) << "," << sign * r * std::sin(phi)
               << "\n";
        }
    }
}

inline double spectral_radius(const SpectrumReport& r) {
    double out = 0.0;
    for (const auto& e : r.eigenvalues) out = std::max(out, std::abs(e));
    return out;
}

struct SpectraSummary {
    double nominalMargin = 0.0;
    double worstMargin = std::numeric_limits<double>::infinity();
    std::size_t unstable = 0;
    std::size_t count = 0;
};

// Writes one spectrum CSV per realization of the (open or closed) loop.
inline SpectraSummary write_spectra(const std::string& dir, const FoltiSystem& sys, const UncertaintyModel& u,
                                    const std::vector<LabeledRealization>& reals, const Controller* k,
                                    double alpha) {
    ensure_dir(dir);
    SpectraSummary s;
    double radius = 1.0;
    for (const auto& lr : reals) {
        const RealizedPlant plant = realize(sys, u, lr.realization);
        const Matrix a = k ? close_loop(plant.A, plant.B, sys.C, *k).A : plant.A;
        const SpectrumReport rep = argument_margin(a, alpha);
        write_spectrum_file(join(dir, "spectrum_" + lr.label + ".csv"), rep);
        if (lr.label == "nominal") s.nominalMargin = rep.margin;
        s.worstMargin = std::min(s.worstMargin, rep.margin);
        s.unstable += rep.stable ? 0 : 1;
        ++s.count;
        radius = std::max(radius, spectral_radius(rep));
    }
    write_boundary_rays(join(dir, "boundary_rays.csv"), alpha, 1.1 * radius);
    return s;
}

struct SimSummary {
    double worstFinalRatio = 0.0;  // max over realizations of ||x(T)||_inf / ||x0||_inf
    std::optional<double> worstSettling = 0.0;
    json perRealization = json::array();
};

inline SimSummary simulate_realizations(const std::string& dir, const FoltiSystem& sys, const UncertaintyModel& u,
                                        const std::vector<LabeledRealization>& reals, const Controller& k,
                                        const Vector& x0Given, const SimConfig& cfg, double band,
                                        std::size_t stride) {
    ensure_dir(dir);
    k.validate(sys);
    SimSummary s;
    for (const auto& lr : reals) {
        const RealizedPlant plant = realize(sys, u, lr.realization);
        const ClosedLoop cl = close_loop(plant.A, plant.B, sys.C, k);
        const Vector x0 = initial_state(x0Given, cl.A.rows());
        const Trajectory tr = simulate(cl, x0, cfg);
        {
            std::ofstream os(join(dir, lr.label + ".csv"));
            if (!os) throw ParseError("cannot write trajectory for " + lr.label);
            write_trajectory_csv(os, tr, stride);
        }
        io::write_text(join(dir, lr.label + ".svg"), trajectory_svg(tr, lr.label));
        const SettlingMetrics m = settling_metrics(tr, band);
        const double x0n = x0.cwiseAbs().maxCoeff();
        const double ratio = x0n > 0 ? tr.states.back().cwiseAbs().maxCoeff() / x0n : 0.0;
        s.worstFinalRatio = std::max(s.worstFinalRatio, ratio);
        if (!m.overall) {
            s.worstSettling.reset();
        } else if (s.worstSettling) {
            s.worstSettling = std::max(*s.worstSettling, *m.overall);
        }
        json comps = json::array();
        for (const auto& c : m.perComponent) comps.push_back(c ? json(*c) : json(nullptr));
        s.perRealization.push_back({{"realization", lr.label},
                                    {"finalNormRatio", ratio},
                                    {"settlingTime", m.overall ? json(*m.overall) : json(nullptr)},
                                    {"componentSettlingTimes", comps}});
    }
    return s;
}

inline void write_verification_csv(const std::string& path, const UncertaintyModel& u,
                                   const VerificationStrategy& strategy, const RobustnessReport& rep) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot write " + path);
    os << "sample,margin";
    for (std::size_t i = 0; i < u.p(); ++i) os << ",i" << (i + 1);
    for (std::size_t j = 0; j < u.q(); ++j) os << ",a" << (j + 1);
    os << "\n";
    os.precision(12);
    const auto samples = verification_samples(u, strategy);
    for (std::size_t s = 0; s < samples.size() && s < rep.margins.size(); ++s) {
        os << s << "," << rep.margins[s];
        for (Eigen::Index i = 0; i < samples[s].iParams.size(); ++i) os << "," << samples[s].iParams(i);
        for (Eigen::Index j = 0; j < samples[s].aParams.size(); ++j) os << "," << samples[s].aParams(j);
        os << "\n";
    }
}

inline int synthesis_exit_code(const SynthesisReport& r) {
    if (!r.feasible) return kInfeasible;
    if (!r.verified()) return kVerificationFailed;
    return r.recoveryInexact ? kVerifiedInexact : kOk;
}

struct SynthFlags {
    int order = 0;
    std::uint64_t seed = 42;
    std::size_t samples = 200;
    double delta = 1e-6;
    double box = 100.0;
    bool certain = false;
    std::string solver;
};

inline SynthesisOptions synthesis_options(const SynthFlags& f) {
    SynthesisOptions o;
    o.backend = backend_name(f.solver);
    o.feasibility.delta = f.delta;
    o.feasibility.boxRadius = f.box;
    o.verification.seed = f.seed;
    o.verification.randomCount = f.samples;
    o.forceCertain = f.certain;
    return o;
}

inline json synth_options_json(const SynthFlags& f, const SynthesisOptions& o) {
    return json{{"order", f.order},
                {"samples", f.samples},
                {"delta", f.delta},
                {"box", f.box},
                {"certain", f.certain},
                {"solver", o.backend}};
}

// Writes report/controller/verification files for one synthesis run.
inline void write_synthesis_outputs(const std::string& dir, const SynthesisReport& rep, const UncertaintyModel& u,
                                    const SynthesisOptions& o, bool includeTiming) {
    ensure_dir(dir);
    io::write_json(join(dir, "report.json"), io::report_to_json(rep, includeTiming));
    if (rep.controller) {
        io::write_json(join(dir, "controller.json"), io::controller_to_json(*rep.controller));
        io::write_text(join(dir, "controller.txt"), io::controller_table(*rep.controller));
        write_verification_csv(join(dir, "verification.csv"), u, o.verification, rep.verification);
    }
}

inline void print_synthesis(std::ostream& os, const SynthesisReport& rep) {
    os << "order " << rep.order << ": " << to_string(rep.status) << " (" << to_string(rep.branch)
       << ", t* = " << rep.solverMargin << ")";
    if (rep.controller) {
        os << ", nominal margin " << rep.nominalMargin << " rad, worst sampled margin "
           << rep.verification.worstMargin << " rad over " << rep.verification.samples << " samples";
        if (rep.recoveryInexact) os << ", recovery inexact";
    }
    os << "\n";
    for (const auto& n : rep.notes) os << "  note: " << n << "\n";
}

// ---- commands ---------------------------------------------------------------

struct CheckFlags {
    std::string system;
    std::optional<double> alpha;
    std::string out = "out";
    bool lmi = false;
};

inline int cmd_check(const CheckFlags& f, Context& ctx) {
    io::SystemFile file = io::load_system(f.system);
    const double alpha = f.alpha.value_or(file.system.alpha);
    if (!(alpha > 0.0 && alpha < 2.0)) throw ParseError("--alpha must lie in (0, 2)");
    ensure_dir(f.out);
    std::vector<std::string> notes;
    const auto reals = nominal_and_vertices(file.uncertainty, kMaxVertexParams, &notes);
    const SpectraSummary s = write_spectra(f.out, file.system, file.uncertainty, reals, nullptr, alpha);
    json opts{{"alpha", alpha}, {"lmi", f.lmi}};
    ctx.out << "alpha " << alpha << ": nominal margin " << s.nominalMargin << " rad, worst margin "
            << s.worstMargin << " rad over " << s.count << " realization(s); " << s.unstable << " unstable\n";
    for (const auto& n : notes) ctx.out << "note: " << n << "\n";
    if (f.lmi) {
        auto solver = make_solver(backend_name(""));
        const LemmaResult lr = lmi_stability_check(file.system.A, alpha, *solver);
        ctx.out << "LMI certificate for the nominal matrix: " << (lr.feasible ? "found" : "not found") << " ("
                << to_string(lr.status) << ")\n";
        opts["lmiFeasible"] = lr.feasible;
    }
    write_manifest(f.out, "check", f.system, opts, 0);
    return s.unstable ? kUnstable : kOk;
}

struct SynthCmdFlags : SynthFlags {
    std::string system;
    std::string out = "out";
    bool explain = false;
};

inline int cmd_synth(const SynthCmdFlags& f, Context& ctx) {
    io::SystemFile file = io::load_system(f.system);
    if (f.order < 0) throw ParseError("--order must be >= 0");
    const SynthesisOptions o = synthesis_options(f);
    if (f.explain) {
        ctx.out << describe(assemble_synthesis(file.system, file.uncertainty, f.order, f.certain));
    }
    const SynthesisReport rep = synthesize(file.system, file.uncertainty, f.order, o);
    write_synthesis_outputs(f.out, rep, file.uncertainty, o, true);
    write_manifest(f.out, "synth", f.system, synth_options_json(f, o), f.seed);
    print_synthesis(ctx.out, rep);
    if (rep.controller) ctx.out << io::controller_table(*rep.controller);
    return synthesis_exit_code(rep);
}

struct SimFlags {
    std::string system;
    std::string controller;
    std::string x0;
    double h = 1e-3;
    double horizon = 10.0;
    double band = 0.02;
    std::size_t stride = 10;
    std::string out = "out";
};

inline int cmd_simulate(const SimFlags& f, Context& ctx) {
    io::SystemFile file = io::load_system(f.system);
    const Controller k = io::controller_from_json(io::read_json_file(f.controller));
    k.validate(file.system);
    const Eigen::Index dim = file.system.states() + k.order;
    const Vector x0 = f.x0.empty() ? Vector::Ones(dim) : parse_vector(f.x0);
    initial_state(x0, dim);
    SimConfig cfg;
    cfg.step = f.h;
    cfg.horizon = f.horizon;
    ensure_dir(f.out);
    const auto reals = nominal_and_vertices(file.uncertainty, 10);
    const SimSummary s =
        simulate_realizations(f.out, file.system, file.uncertainty, reals, k, x0, cfg, f.band, f.stride);
    io::write_json(join(f.out, "settling.json"),
                   json{{"band", f.band},
                        {"horizon", f.horizon},
                        {"step", f.h},
                        {"worstFinalNormRatio", s.worstFinalRatio},
                        {"worstSettlingTime", s.worstSettling ? json(*s.worstSettling) : json(nullptr)},
                        {"realizations", s.perRealization}});
    write_manifest(f.out, "simulate", f.system,
                   json{{"controller", f.controller},
                        {"x0", io::vector_to_json(initial_state(x0, dim))},
                        {"h", f.h},
                        {"T", f.horizon},
                        {"band", f.band},
                        {"stride", f.stride}},
                   0);
    ctx.out << "simulated " << reals.size() << " realization(s); worst ||x(T)||/||x0|| = " << s.worstFinalRatio
            << ", worst settling time "
            << (s.worstSettling ? std::to_string(*s.worstSettling) : std::string("not settled")) << "\n";
    return kOk;
}

struct ReproFlags : SynthFlags {
    std::string example;
    std::string out = "out";
    double h = 1e-3;
    double horizon = 10.0;
    std::size_t stride = 10;
};

inline int cmd_repro(const ReproFlags& f, Context& ctx) {
    int which = 0;
    if (f.example == "ex1") which = 1;
    else if (f.example == "ex2") which = 2;
    else throw ParseError("unknown example '" + f.example + "' (expected ex1 or ex2)");
    const BenchmarkCase bc = benchmark_example(which);
    const FoltiSystem& sys = bc.system;
    const UncertaintyModel& unc = bc.uncertainty;
    ensure_dir(f.out);
    io::write_json(join(f.out, "system.json"), io::system_to_json({bc.name, sys, unc}));

    const auto reals = nominal_and_vertices(unc, 10);
    const SpectraSummary open = write_spectra(join(f.out, "open_loop"), sys, unc, reals, nullptr, sys.alpha);
    ctx.out << bc.name << " (alpha " << sys.alpha << "): open-loop nominal margin " << open.nominalMargin
            << " rad, " << open.unstable << "/" << open.count << " realizations unstable\n";

    Vector x0(3);
    x0 << 1.0, -1.0, 0.5;
    SimConfig cfg;
    cfg.step = f.h;
    cfg.horizon = f.horizon;

    json orders = json::array();
    int code = kOk;
    for (int nc = 0; nc <= 2; ++nc) {
        SynthFlags sf = f;
        sf.order = nc;
        const SynthesisOptions o = synthesis_options(sf);
        const SynthesisReport rep = synthesize(sys, unc, nc, o);
        const std::string dir = join(f.out, "nc" + std::to_string(nc));
        write_synthesis_outputs(dir, rep, unc, o, false);
        print_synthesis(ctx.out, rep);
        json entry{{"order", nc},
                   {"feasible", rep.feasible},
                   {"status", to_string(rep.status)},
                   {"branch", to_string(rep.branch)},
                   {"solverMargin", rep.solverMargin},
                   {"verified", rep.verified()},
                   {"recoveryInexact", rep.recoveryInexact},
                   {"recoveryResiduals", {{"B", rep.residualB}, {"D", rep.residualD}}}};
        if (rep.controller) {
            const SpectraSummary closed =
                write_spectra(join(dir, "closed_loop"), sys, unc, reals, &*rep.controller, sys.alpha);
            const SimSummary sim = simulate_realizations(join(dir, "trajectories"), sys, unc, reals,
                                                         *rep.controller, x0, cfg, 0.02, f.stride);
            entry["nominalMargin"] = rep.nominalMargin;
            entry["worstSampledMargin"] = rep.verification.worstMargin;
            entry["samples"] = rep.verification.samples;
            entry["closedLoopVertexWorstMargin"] = closed.worstMargin;
            entry["worstFinalNormRatio"] = sim.worstFinalRatio;
            entry["worstSettlingTime"] = sim.worstSettling ? json(*sim.worstSettling) : json(nullptr);
        }
        code = std::max(code, synthesis_exit_code(rep) == kVerifiedInexact ? kOk : synthesis_exit_code(rep));
        orders.push_back(entry);
    }
    json summary{{"example", bc.name},
                 {"alpha", sys.alpha},
                 {"openLoop",
                  {{"nominalMargin", open.nominalMargin},
                   {"worstMargin", open.worstMargin},
                   {"unstableRealizations", open.unstable},
                   {"realizations", open.count}}},
                 {"orders", orders},
                 {"x0", io::vector_to_json(x0)},
                 {"simulation", {{"step", f.h}, {"horizon", f.horizon}, {"realizations", "nominal+vertices"}}},
                 {"decisions",
                  {"output matrix taken as C = I3 (full-state measurement); B = I3",
                   "initial state [1, -1, 0.5] padded with zeros for controller states",
                   "vertex sampling is a falsification check, not a robustness proof"}}};
    io::write_json(join(f.out, "summary.json"), summary);
    json opts = synth_options_json(f, synthesis_options(f));
    opts.erase("order");
    opts["example"] = f.example;
    opts["h"] = f.h;
    opts["T"] = f.horizon;
    opts["stride"] = f.stride;
    write_manifest(f.out, "repro", f.example, opts, f.seed);
    return code;
}

struct ExportFlags {
    std::string system;
    int order = 0;
    std::string theorem = "auto";
    std::string out = "problem.dat-s";
    double delta = 1e-6;
    double box = 100.0;
    bool explain = false;
};

inline int cmd_export_sdpa(const ExportFlags& f, Context& ctx) {
    io::SystemFile file = io::load_system(f.system);
    if (f.order < 0) throw ParseError("--order must be >= 0");
    LmiProblem p;
    if (f.theorem == "auto") {
        p = assemble_synthesis(file.system, file.uncertainty, f.order);
    } else if (f.theorem == "certain") {
        p = assemble_certain(file.system, f.order);
    } else if (f.theorem == "1" || f.theorem == "2") {
        const Envelope env = uncertainty_bounds(file.uncertainty, file.system.states());
        p = f.theorem == "1" ? assemble_theorem1(file.system, env, f.order)
                             : assemble_theorem2(file.system, env, f.order);
    } else {
        throw ParseError("--theorem must be one of auto, 1, 2, certain");
    }
    if (f.explain) ctx.out << describe(p);
    FeasibilityOptions fo;
    fo.delta = f.delta;
    fo.boxRadius = f.box;
    const ConicProgram c = to_feasibility_program(p, fo);
    const fs::path outPath(f.out);
    const std::string dir = outPath.has_parent_path() ? outPath.parent_path().string() : ".";
    ensure_dir(dir);
    {
        std::ofstream os(f.out);
        if (!os) throw ParseError("cannot write " + f.out);
        export_sdpa(c, os, std::string(to_string(p.branch)) + " order " + std::to_string(f.order));
    }
    write_manifest(dir, "export-sdpa", f.system,
                   json{{"order", f.order}, {"theorem", f.theorem}, {"delta", f.delta}, {"box", f.box},
                        {"file", f.out}},
                   0);
    ctx.out << "wrote " << f.out << " (" << c.numVars << " variables, " << c.blocks.size() << " blocks)\n";
    return kOk;
}

// ---- entry point --------------------------------------------------------------

inline void add_synth_flags(CLI::App* cmd, SynthFlags& f) {
    cmd->add_option("--seed", f.seed, "Seed for random verification samples")->capture_default_str();
    cmd->add_option("--samples", f.samples, "Number of random verification samples")->capture_default_str();
    cmd->add_option("--delta", f.delta, "Strictness margin (normalized units)")->capture_default_str();
    cmd->add_option("--box", f.box, "Bound on every decision variable entry")->capture_default_str();
    cmd->add_flag("--certain", f.certain, "Ignore uncertainty and use the nominal-only LMI");
    cmd->add_option("--solver", f.solver, "Solver backend (overrides FRACLMI_SOLVER)");
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    Context ctx{out, err};
    CLI::App app{"Fractional-order LTI stability analysis and robust output feedback synthesis", "fraclmi"};
    app.set_help_flag("--help", "Print this help message and exit");  // keeps "-h" free: --h is the step size
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CheckFlags check;
    auto* c = app.add_subcommand("check", "Argument-criterion stability check of a system file");
    c->add_option("system", check.system, "System JSON file")->required();
    c->add_option("--alpha", check.alpha, "Override the fractional order");
    c->add_option("--out", check.out, "Output directory")->capture_default_str();
    c->add_flag("--lmi", check.lmi, "Also search for an LMI stability certificate");

    SynthCmdFlags synth;
    auto* s = app.add_subcommand("synth", "Synthesize a robust output feedback controller");
    s->add_option("system", synth.system, "System JSON file")->required();
    s->add_option("--order", synth.order, "Controller order n_c")->capture_default_str();
    s->add_option("--out", synth.out, "Output directory")->capture_default_str();
    s->add_flag("--explain", synth.explain, "Print the LMI block structure");
    add_synth_flags(s, synth);

    SimFlags sim;
    auto* m = app.add_subcommand("simulate", "Simulate the closed loop for nominal and vertex realizations");
    m->add_option("system", sim.system, "System JSON file")->required();
    m->add_option("controller", sim.controller, "Controller JSON (or a synthesis report)")->required();
    m->add_option("--x0", sim.x0, "Initial state, comma separated (zero padded)");
    m->add_option("--h", sim.h, "Step size")->capture_default_str();
    m->add_option("--T", sim.horizon, "Horizon")->capture_default_str();
    m->add_option("--band", sim.band, "Settling band relative to ||x0||")->capture_default_str();
    m->add_option("--stride", sim.stride, "Write every k-th sample to CSV")->capture_default_str();
    m->add_option("--out", sim.out, "Output directory")->capture_default_str();

    ReproFlags repro;
    auto* r = app.add_subcommand("repro", "Regenerate the benchmark artifact set (ex1 or ex2)");
    r->add_option("example", repro.example, "ex1 or ex2")->required();
    r->add_option("--out", repro.out, "Output directory")->capture_default_str();
    r->add_option("--h", repro.h, "Simulation step")->capture_default_str();
    r->add_option("--T", repro.horizon, "Simulation horizon")->capture_default_str();
    r->add_option("--stride", repro.stride, "Write every k-th sample to CSV")->capture_default_str();
    add_synth_flags(r, repro);

    ExportFlags ex;
    auto* e = app.add_subcommand("export-sdpa", "Write the synthesis feasibility program in SDPA sparse format");
    e->add_option("system", ex.system, "System JSON file")->required();
    e->add_option("--order", ex.order, "Controller order n_c")->capture_default_str();
    e->add_option("--theorem", ex.theorem, "auto, 1, 2 or certain")->capture_default_str();
    e->add_option("--out", ex.out, "Output .dat-s file")->capture_default_str();
    e->add_option("--delta", ex.delta, "Strictness margin")->capture_default_str();
    e->add_option("--box", ex.box, "Variable bound")->capture_default_str();
    e->add_flag("--explain", ex.explain, "Print the LMI block structure");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& pe) {
        err << "error: " << pe.what() << "\n";
        return kPrecondition;
    }

    try {
        if (*c) return cmd_check(check, ctx);
        if (*s) return cmd_synth(synth, ctx);
        if (*m) return cmd_simulate(sim, ctx);
        if (*r) return cmd_repro(repro, ctx);
        if (*e) return cmd_export_sdpa(ex, ctx);
    } catch (const SolverFailure& ex2) {
        err << "solver failure: " << ex2.what() << "\n";
        return kSolverFailure;
    } catch (const RecoveryFailure& ex2) {
        err << "controller recovery failed: " << ex2.what() << "\n";
        return kSolverFailure;
    } catch (const Error& ex2) {
        err << "error: " << ex2.what() << "\n";
        return kPrecondition;
    } catch (const std::exception& ex2) {
        err << "internal error: " << ex2.what() << "\n";
        return kInternal;
    }
    return kPrecondition;
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace fraclmi::cli
