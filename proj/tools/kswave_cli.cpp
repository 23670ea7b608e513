// kswave command-line driver: simulate | eig | regime | verify | sweep <cfg>
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "kswave/error.hpp"
#include "kswave/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNumerical = 2;

const char* kKeys = R"(Config keys (flat `key = value`, `#` comments):
  mode            simulate|eig|regime|verify|sweep (the subcommand wins)
  chi, mu, nu, b  chemotaxis sensitivity 0, production 1, decay 1, damping 1
  c               habitat shift speed 0
  L, h            half length 20, space step 0.1 (2L/h must be an integer)
  tau, T          time step 0.002, horizon 10
  bc              case1 (Dirichlet/zero flux) | case2 (Dirichlet both ends)
  neumann_closure first | second (Case 1 only), first
  profile         growth rate breakpoints x:r,x:r,...  (required)
  u0 / u0_bump    initial data x:u,... or left:right:peak
  snapshot_times  comma list within [0, T]
  conv_window 1, conv_tol 1e-3, extinct_tol 1e-3, plateau_rel_tol 0.02
  allow_unstable  false
  out             output directory (default out)
  eig_L, eig_h 0.01, lambda_tol 1e-4
  epsilons 0.1,0.05,0.025, envelope_epsilon 0.05, samples 100, seed 1, r1, rbar
  sweep_b, sweep_c, sweep_chi   min:max:count
  horizon_scale 1, threads 0 (all cores))";

std::vector<double> parse_times(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double t = 0.0;
        try {
            t = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0) throw kswave::ValidationError("--snapshot-times: '" + item + "' is not a number");
        out.push_back(t);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Forced waves of a Keller-Segel system in a shifting habitat"};
    app.footer(kKeys);
    app.require_subcommand(1);

    std::string cfg_path;
    std::string out_dir;
    std::string times;
    bool allow_unstable = false;

    const std::vector<std::pair<std::string, std::string>> modes{
        {"simulate", "run the explicit scheme and classify the outcome"},
        {"eig", "principal eigenvalues and the lambda_inf certificate"},
        {"regime", "speed and damping conditions for the parameters"},
        {"verify", "certify envelopes, ignition speeds and the fixed point"},
        {"sweep", "regime map over b, c and chi"}};
    for (const auto& [name, help] : modes) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("cfg", cfg_path, "config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--snapshot-times", times, "comma-separated snapshot times");
        sub->add_flag("--allow-unstable", allow_unstable, "run even if tau/h^2 > 1/2");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        // --help exits 0; every usage error is a validation error.
        return app.exit(err) == 0 ? 0 : 1;
    }
    const std::string mode = app.get_subcommands().front()->get_name();

    try {
        std::ifstream in(cfg_path);
        if (!in) throw kswave::ValidationError("cannot read config " + cfg_path);
        std::stringstream buf;
        buf << in.rdbuf();
        kswave::RunSpec spec = kswave::parse_config_unchecked(buf.str());
        spec.mode = kswave::parse_mode(mode);
        if (!out_dir.empty()) spec.out = out_dir;
        if (!times.empty()) spec.snapshot_times = parse_times(times);
        if (allow_unstable) spec.allow_unstable = true;
        spec.validate();

        const kswave::ArtifactBundle bundle = kswave::run_experiment(spec);
        for (const auto& line : bundle.summary) std::cout << line << "\n";
        std::cout << "wrote " << bundle.files.size() << " files to " << bundle.dir.string() << "\n";
        if (bundle.fault) {
            std::cerr << "numerical fault: " << *bundle.fault << "\n";
            return kNumerical;
        }
        return kOk;
    } catch (const kswave::ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kValidation;
    } catch (const kswave::NumericalError& err) {
        std::cerr << "numerical fault: " << err.what() << "\n";
        return kNumerical;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kValidation;
    }
}
