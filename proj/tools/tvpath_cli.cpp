#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace tvpath;

/// stdin for "" or "-", otherwise the named file.
std::unique_ptr<std::istream> open_input(const std::string& file) {
    if (file.empty() || file == "-") return std::make_unique<std::istream>(std::cin.rdbuf());
    auto in = std::make_unique<std::ifstream>(file);
    if (!*in) throw input_error("cannot open '" + file + "'");
    return in;
}

template <class Fn>
int with_output(const std::string& file, Fn&& fn) {
    if (file.empty() || file == "-") return fn(std::cout);
    std::ofstream out(file);
    if (!out) throw input_error("cannot write '" + file + "'");
    return fn(out);
}

void add_q_flags(CLI::App* cmd, std::optional<double>& q) {
    auto* fixed = cmd->add_option("--q", q, "Scale ratio q > 1 for the discrete derivatives");
    cmd->add_flag("--auto-q", "Derive q from the breakpoint spacing (default)")->excludes(fixed);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Total-variation denoising along the exact regularisation path"};
    app.require_subcommand(1);

    std::string input, output;

    cli::DenoiseOptions den;
    double lambda = 0.0, sigma = 0.0;
    auto* denoise = app.add_subcommand("denoise", "Denoise a t,y table and write t,y,u");
    denoise->add_option("input", input, "Input table (default stdin)");
    auto* lambda_opt = denoise->add_option("--lambda", lambda, "Use this lambda instead of a selector");
    denoise->add_option("--method", den.select.method, "Selector when --lambda is absent")
        ->check(CLI::IsMember({"ours", "aut", "aut-literal", "sure", "cv"}))
        ->excludes(lambda_opt);
    auto* sigma_opt = denoise->add_option("--sigma", sigma, "Noise level for aut/sure (default: MAD estimate)");
    add_q_flags(denoise, den.select.q);
    denoise->add_option("--folds", den.select.folds, "Folds for cv");
    denoise->add_option("--seed", den.select.seed, "Fold assignment seed for cv");
    denoise->add_option("--emit-path", den.emit_path, "Also write the path JSON to this file");
    denoise->add_option("--output", output, "Output CSV (default stdout)");

    auto* path = app.add_subcommand("path", "Print the merge values and extremum changes as JSON");
    path->add_option("input", input, "Input table (default stdin)");
    path->add_option("--output", output, "Output JSON (default stdout)");

    cli::StreamCliOptions str;
    auto* stream = app.add_subcommand("stream", "Online denoising, one report line per sample");
    stream->add_option("input", input, "Input table (default stdin)");
    stream->add_option("--lambda-hat-policy", str.policy, "ours | 2ours | fixed:X");
    add_q_flags(stream, str.q);
    stream->add_option("--emit-path", str.emit_path, "Write the final path JSON to this file");
    stream->add_option("--output", output, "Output (default stdout)");

    cli::BenchOptions bench_opt;
    std::uint64_t seed = 0;
    auto* bench = app.add_subcommand("bench", "Run a simulation config");
    bench->add_option("config", bench_opt.config, "Config file")->required();
    auto* seed_opt = bench->add_option("--seed", seed, "Override the config seed");
    bench->add_option("--set", bench_opt.overrides, "Override a config key (key=value)");
    bench->add_option("--output", bench_opt.output_dir, "Report directory (default .)");

    cli::VerifyOptions ver;
    auto* verify = app.add_subcommand("verify", "Check the path against the brute-force minimiser");
    verify->add_option("input", input, "Input table (default stdin)");
    verify->add_option("--lambda", ver.lambdas, "Lambda values to check (default: grid)");
    verify->add_option("--tolerance", ver.tolerance, "Largest accepted sup-norm gap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kInputError;
    }

    try {
        if (*denoise) {
            if (*lambda_opt) den.select.lambda = lambda;
            if (*sigma_opt) den.select.sigma = sigma;
            auto in = open_input(input);
            return with_output(output, [&](std::ostream& out) { return cli::cmd_denoise(*in, out, std::cerr, den); });
        }
        if (*path) {
            auto in = open_input(input);
            return with_output(output, [&](std::ostream& out) { return cli::cmd_path(*in, out); });
        }
        if (*stream) {
            auto in = open_input(input);
            return with_output(output, [&](std::ostream& out) { return cli::cmd_stream(*in, out, str); });
        }
        if (*bench) {
            if (*seed_opt) bench_opt.seed = seed;
            return cli::cmd_bench(std::cout, bench_opt);
        }
        if (*verify) {
            auto in = open_input(input);
            return cli::cmd_verify(*in, std::cout, ver);
        }
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kInputError;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return cli::kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return cli::kNumericalError;
    }
    return cli::kOk;
}
