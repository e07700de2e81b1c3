// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokrecover/cli.hpp"

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "tokrecover/cost_model.hpp"
#include "tokrecover/harness.hpp"
#include "tokrecover/pipeline.hpp"
#include "tokrecover/scoring.hpp"
#include "tokrecover/simd/kernels.hpp"
#include "tokrecover/tensor_io.hpp"
#include "tokrecover/viz.hpp"

namespace tokrecover::cli {

namespace {

struct SynthArgs {
    harness::SyntheticSpec spec;
    std::string out;
};

struct CompressArgs {
    std::string in;
    std::size_t k_lof = 20;
    std::optional<std::size_t> k_lof2;
    double tau = 1.0;
    std::string out;
    std::string report;
    std::string viz_prefix;
    std::string model_config;
    std::size_t n_text = 60;
    std::size_t threads = 1;
    bool no_timing = false;
};

struct ScoreArgs {
    std::string in;
    std::string mode = "visual";
    std::string out_csv;
    std::size_t threads = 1;
};

struct CostArgs {
    cost::ModelConfig cfg = cost::ModelConfig::vicuna_7b();
    std::size_t n_visual = 576;
    std::size_t n_text = 60;
    std::optional<std::size_t> n_visual_after;
};

struct OracleArgs {
    std::uint64_t seed = 0;
    std::size_t cases = 200;
};

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

/// Per-token values reordered so position i holds original index i.
std::vector<double> by_original_index(const TokenBundle& bundle, std::span<const double> values) {
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t r = 0; r < values.size(); ++r) {
        const std::uint64_t idx = bundle.original_indices[r];
        if (idx >= out.size()) {
            throw Error(ErrorKind::SizeMismatch, "original indices do not tile the grid");
        }
        out[idx] = values[r];
    }
    return out;
}

int do_synth(const SynthArgs& args, std::ostream& out) {
    const harness::Synthetic syn = harness::gen_synthetic(args.spec);
    io::write_bundle(syn.bundle, args.out);
    out << "wrote " << args.out << ": n=" << syn.bundle.size() << " d=" << syn.bundle.dim()
        << " visual_salient=" << syn.truth.visual.size() << " text_salient=" << syn.truth.text.size() << "\n";
    return kExitOk;
}

int do_compress(const CompressArgs& args, std::ostream& out) {
    const TokenBundle bundle = io::read_bundle(args.in);

    CompressOptions options;
    options.primary.k = args.k_lof;
    options.primary.tau = args.tau;
    options.secondary.k = args.k_lof2.value_or(args.k_lof);
    options.secondary.tau = args.tau;
    options.compute.threads = args.threads;
    options.model = args.model_config.empty() ? cost::ModelConfig::vicuna_7b()
                                              : cost::load_model_config(args.model_config);
    options.text_tokens = args.n_text;
    options.timing = !args.no_timing;

    const CompressResult result = compress(bundle, options);
    io::write_bundle(result.compressed, args.out);
    io::write_report(result.report, args.report);

    if (!args.viz_prefix.empty()) {
        const ScoreVector vis = visual_score(bundle, options.compute);
        viz::write_heat(by_original_index(bundle, vis.normalized), bundle.grid, args.viz_prefix + "_visual.pgm");
        if (bundle.text) {
            const ScoreVector txt = text_score(bundle, options.compute);
            viz::write_heat(by_original_index(bundle, txt.normalized), bundle.grid, args.viz_prefix + "_text.pgm");
        }
        viz::write_mask(result.selection, bundle.grid, args.viz_prefix + "_mask.pgm");
    }

    const CompressionReport& r = result.report;
    out << "n_input=" << r.n_input << " visual_kept=" << r.n_visual_kept << " text_recovered=" << r.n_text_recovered
        << " merged=" << r.n_merged << " output=" << r.n_output << " retention=" << r.retention_ratio << "\n";
    return kExitOk;
}

int do_score(const ScoreArgs& args, std::ostream& out) {
    const TokenBundle bundle = io::read_bundle(args.in);
    ComputeOptions compute;
    compute.threads = args.threads;
    const ScoreVector score = args.mode == "text" ? text_score(bundle, compute) : visual_score(bundle, compute);
    std::string csv;
    char buf[128];
    for (std::size_t i = 0; i < score.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g\n",
                      static_cast<unsigned long long>(bundle.original_indices[i]), score.raw[i],
                      score.normalized[i]);
        csv += buf;
    }
    io::write_file(args.out_csv, csv);
    out << "wrote " << score.size() << " " << args.mode << " scores to " << args.out_csv << "\n";
    return kExitOk;
}

int do_cost(const CostArgs& args, std::ostream& out) {
    const std::size_t before = args.n_visual + args.n_text;
    const double flops_before = cost::prefill_flops(args.cfg, before);
    out << "tokens: " << before << "\n";
    out << "prefill_flops: " << sci(flops_before) << "\n";
    out << "kv_cache_bytes: " << sci(cost::kv_cache_bytes(args.cfg, before)) << "\n";
    if (args.n_visual_after) {
        const std::size_t after = *args.n_visual_after + args.n_text;
        const double flops_after = cost::prefill_flops(args.cfg, after);
        out << "tokens_after: " << after << "\n";
        out << "prefill_flops_after: " << sci(flops_after) << "\n";
        out << "kv_cache_bytes_after: " << sci(cost::kv_cache_bytes(args.cfg, after)) << "\n";
        out << "flops_reduction: " << 1.0 - flops_after / flops_before << "\n";
    }
    return kExitOk;
}

int do_oracle_check(const OracleArgs& args, std::ostream& out) {
    const harness::OracleCheckSummary s = harness::run_oracle_checks(args.seed, args.cases);
    out << "lof: " << s.lof_cases - s.lof_failures << "/" << s.lof_cases << " passed\n";
    out << "assign: " << s.assign_cases - s.assign_failures << "/" << s.assign_cases << " passed\n";
    out << "merge: " << s.merge_cases - s.merge_failures << "/" << s.merge_cases << " passed\n";
    out << (s.ok() ? "oracle-check: PASS\n" : "oracle-check: FAIL\n");
    return s.ok() ? kExitOk : kExitOracle;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Text-guided visual token compression"};
    app.name("tokrecover");
    app.require_subcommand(1);

    std::string isa;
    app.add_option("--isa", isa, "Kernel set: scalar or avx2 (default: widest supported)")
        ->check(CLI::IsMember({"scalar", "avx2"}));

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic bundle with planted salient tokens");
    synth_cmd->add_option("--seed", synth.spec.seed, "Generator seed")->required();
    synth_cmd->add_option("--n", synth.spec.n, "Token count")->capture_default_str();
    synth_cmd->add_option("--d", synth.spec.d, "Token dimension")->capture_default_str();
    synth_cmd->add_option("--dt", synth.spec.dt, "Text dimension (0 = no text)")->capture_default_str();
    synth_cmd->add_option("--salient-visual", synth.spec.n_visual_salient, "Planted visual tokens")
        ->capture_default_str();
    synth_cmd->add_option("--salient-text", synth.spec.n_text_salient, "Planted text tokens")
        ->capture_default_str();
    synth_cmd->add_option("--noise", synth.spec.noise_sigma, "Background noise sigma")->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output TKB1 file")->required();

    CompressArgs comp;
    auto* comp_cmd = app.add_subcommand("compress", "Compress a bundle");
    comp_cmd->add_option("--in", comp.in, "Input TKB1 file")->required();
    comp_cmd->add_option("--k-lof", comp.k_lof, "LOF neighbourhood size")->capture_default_str()
        ->check(CLI::PositiveNumber);
    comp_cmd->add_option("--k-lof2", comp.k_lof2, "LOF size for cluster seeding (default: --k-lof)")
        ->check(CLI::PositiveNumber);
    comp_cmd->add_option("--tau", comp.tau, "LOF outlier threshold")->capture_default_str();
    comp_cmd->add_option("--out", comp.out, "Output TKB1 file")->required();
    comp_cmd->add_option("--report", comp.report, "Report file")->required();
    comp_cmd->add_option("--viz", comp.viz_prefix, "Write PREFIX_{visual,text,mask}.pgm");
    comp_cmd->add_option("--model-config", comp.model_config, "Model shape JSON for cost estimates");
    comp_cmd->add_option("--n-text", comp.n_text, "Prompt text tokens in cost estimates")->capture_default_str();
    comp_cmd->add_option("--threads", comp.threads, "Worker threads (0 = all cores)")->capture_default_str();
    comp_cmd->add_flag("--no-timing", comp.no_timing, "Omit wall time from the report");

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Write per-token scores as CSV (index,raw,normalized)");
    score_cmd->add_option("--in", score.in, "Input TKB1 file")->required();
    score_cmd->add_option("--mode", score.mode, "visual or text")->check(CLI::IsMember({"visual", "text"}))
        ->capture_default_str();
    score_cmd->add_option("--out-csv", score.out_csv, "Output CSV file")->required();
    score_cmd->add_option("--threads", score.threads, "Worker threads")->capture_default_str();

    CostArgs costs;
    auto* cost_cmd = app.add_subcommand("cost", "Estimate prefill FLOPs and KV-cache size");
    cost_cmd->add_option("--layers", costs.cfg.layers, "Transformer layers")->required();
    cost_cmd->add_option("--dmodel", costs.cfg.hidden, "Hidden size")->required();
    cost_cmd->add_option("--dff", costs.cfg.ffn, "FFN inner size")->required();
    cost_cmd->add_option("--n-visual", costs.n_visual, "Visual tokens")->required();
    cost_cmd->add_option("--n-text", costs.n_text, "Text tokens")->capture_default_str();
    cost_cmd->add_option("--bytes-per-param", costs.cfg.bytes_per_param, "2 fp16, 1 int8, 0.5 int4")
        ->capture_default_str();
    cost_cmd->add_option("--n-visual-after", costs.n_visual_after, "Visual tokens after compression");

    OracleArgs oracle;
    auto* oracle_cmd = app.add_subcommand("oracle-check", "Run oracle-equivalence checks");
    oracle_cmd->add_option("--seed", oracle.seed, "Seed")->capture_default_str();
    oracle_cmd->add_option("--cases", oracle.cases, "Randomized cases per check")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (!isa.empty()) {
            simd::set_active(simd::isa_from_string(isa));
        }
        if (synth_cmd->parsed()) return do_synth(synth, out);
        if (comp_cmd->parsed()) return do_compress(comp, out);
        if (score_cmd->parsed()) return do_score(score, out);
        if (cost_cmd->parsed()) return do_cost(costs, out);
        if (oracle_cmd->parsed()) return do_oracle_check(oracle, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        const bool usage = e.kind() == ErrorKind::InvalidParams || e.kind() == ErrorKind::InvalidCounts;
        return usage ? kExitUsage : kExitInput;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace tokrecover::cli
