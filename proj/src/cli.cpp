#include "vtseg/cli.hpp"

#include "vtseg/config.hpp"
#include "vtseg/metrics.hpp"
#include "vtseg/morphology.hpp"
#include "vtseg/nifti.hpp"
#include "vtseg/phantom.hpp"
#include "vtseg/tiling.hpp"
#include "vtseg/version.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace vtseg {

const char* to_string(ConfigSource s)
{
    switch (s) {
    case ConfigSource::Default: return "default";
    case ConfigSource::File: return "config";
    case ConfigSource::Flag: return "flag";
    }
    return "?";
}

EffectiveConfig::EffectiveConfig()
{
    set("coarse_patch", "128,128,128", ConfigSource::Default);
    set("coarse_stride", "96,96,96", ConfigSource::Default);
    set("fine_patch", "64,64,64", ConfigSource::Default);
    set("coarse_threshold", "0.5", ConfigSource::Default);
    set("fine_threshold", "0.5", ConfigSource::Default);
    set("d_min", "auto", ConfigSource::Default);
    set("min_component_size", "0", ConfigSource::Default);
    set("connectivity3d", "26", ConfigSource::Default);
    set("connectivity2d", "8", ConfigSource::Default);
    set("coarse_predictor", "window:lo=150,hi=600,softness=0", ConfigSource::Default);
    set("fine_predictor", "window:lo=150,hi=600,softness=0", ConfigSource::Default);
    set("source_tag", "unknown", ConfigSource::Default);
}

void EffectiveConfig::set(const std::string& key, const std::string& value, ConfigSource src)
{
    if (values_.find(key) == values_.end())
        order_.push_back(key);
    values_[key] = {value, src};
}

void EffectiveConfig::apply_file(const std::map<std::string, std::string>& kv)
{
    for (const auto& [key, value] : kv) {
        if (values_.find(key) == values_.end())
            throw ConfigError("unknown config key '" + key + "'");
        set(key, value, ConfigSource::File);
    }
}

void EffectiveConfig::apply_flag(const std::string& key, const std::string& value)
{
    if (values_.find(key) == values_.end())
        throw ConfigError("unknown config key '" + key + "'");
    set(key, value, ConfigSource::Flag);
}

const std::string& EffectiveConfig::value(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("unknown config key '" + key + "'");
    return it->second.first;
}

ConfigSource EffectiveConfig::source(const std::string& key) const
{
    return values_.at(key).second;
}

PredictorSpec parse_predictor(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string kind = trim(colon == std::string::npos ? text : text.substr(0, colon));
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);

    std::map<std::string, std::string> kv;
    std::string positional;
    if (!trim(rest).empty()) {
        for (const std::string& piece : split(rest, ',')) {
            const auto eq = piece.find('=');
            if (eq == std::string::npos)
                positional = trim(piece);
            else
                kv[trim(piece.substr(0, eq))] = trim(piece.substr(eq + 1));
        }
    }
    auto take = [&kv](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end())
            return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto done = [&kv, &text] {
        if (!kv.empty())
            throw ConfigError("predictor '" + text + "': unknown parameter '" +
                              kv.begin()->first + "'");
    };

    if (kind == "window") {
        WindowPredictor w;
        if (auto v = take("lo"))
            w.lo = parse_double("lo", *v);
        else
            throw ConfigError("window predictor requires lo=");
        if (auto v = take("hi"))
            w.hi = parse_double("hi", *v);
        else
            throw ConfigError("window predictor requires hi=");
        if (auto v = take("softness"))
            w.softness = parse_double("softness", *v);
        done();
        if (!positional.empty())
            throw ConfigError("window predictor takes no positional parameter");
        if (!(w.lo < w.hi) || w.softness < 0.0)
            throw ConfigError("window predictor requires lo < hi and softness >= 0");
        return w;
    }
    if (kind == "probfile") {
        std::string path = positional;
        if (auto v = take("path"))
            path = *v;
        done();
        if (path.empty())
            throw ConfigError("probfile predictor requires a path");
        NiftiReadOptions opts;
        opts.kind_hint = VoxelKind::Probability;
        return ProbFilePredictor{read_volume_file(path, opts).volume};
    }
    if (kind == "oracle") {
        std::string path = positional;
        double noise_sd = 0.0;
        std::uint64_t seed = 0;
        if (auto v = take("path"))
            path = *v;
        if (auto v = take("noise_sd"))
            noise_sd = parse_double("noise_sd", *v);
        if (auto v = take("seed"))
            seed = parse_uint("seed", *v);
        done();
        if (path.empty())
            throw ConfigError("oracle predictor requires a path");
        if (noise_sd < 0.0)
            throw ConfigError("oracle noise_sd must be >= 0");
        Volume ref = read_volume_file(path).volume;
        if (ref.kind() != VoxelKind::Label)
            throw ConfigError("oracle predictor reference '" + path +
                              "' is not a binary mask");
        return OraclePredictor{std::move(ref), noise_sd, seed};
    }
    throw ConfigError("unknown predictor kind '" + kind +
                      "' (expected window, probfile or oracle)");
}

PipelineConfig EffectiveConfig::materialize() const
{
    PipelineConfig cfg;
    cfg.coarse_patch = parse_int3("coarse_patch", value("coarse_patch"));
    cfg.coarse_stride = parse_int3("coarse_stride", value("coarse_stride"));
    cfg.fine_patch = parse_int3("fine_patch", value("fine_patch"));
    cfg.coarse_threshold = parse_double("coarse_threshold", value("coarse_threshold"));
    cfg.fine_threshold = parse_double("fine_threshold", value("fine_threshold"));
    const std::string dmin = value("d_min");
    cfg.d_min = (dmin == "auto") ? -1 : static_cast<int>(parse_int("d_min", dmin));
    cfg.min_component_size = parse_int("min_component_size", value("min_component_size"));
    cfg.connectivity3d = static_cast<int>(parse_int("connectivity3d", value("connectivity3d")));
    cfg.connectivity2d = static_cast<int>(parse_int("connectivity2d", value("connectivity2d")));
    cfg.coarse_predictor = parse_predictor(value("coarse_predictor"));
    cfg.fine_predictor = parse_predictor(value("fine_predictor"));
    cfg.source_tag = source_tag_from_string(value("source_tag"));
    return cfg;
}

namespace {

// ---------------------------------------------------------------- helpers

struct ConfigCli {
    std::string config_path;
    std::vector<std::string> sets; // key=value overrides
    std::string tag;               // sugar for source_tag

    void add_options(CLI::App* cmd)
    {
        cmd->add_option("--config", config_path, "flat key = value config file");
        cmd->add_option("--set", sets, "override a config key (key=value, repeatable)")
            ->take_all();
        cmd->add_option("--tag", tag, "source tag (K, R, D, unknown); overrides config");
    }

    EffectiveConfig build() const
    {
        EffectiveConfig cfg;
        if (!config_path.empty())
            cfg.apply_file(read_kv_file(config_path));
        for (const std::string& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--set expects key=value, got '" + s + "'");
            cfg.apply_flag(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        }
        if (!tag.empty())
            cfg.apply_flag("source_tag", tag);
        return cfg;
    }
};

int resolve_workers(int flag_value)
{
    if (flag_value > 0)
        return flag_value;
    if (const char* env = std::getenv("VTSEG_WORKERS")) {
        try {
            return std::max(1, static_cast<int>(parse_int("VTSEG_WORKERS", env)));
        } catch (const ConfigError&) {
            throw ConfigError("VTSEG_WORKERS is not an integer");
        }
    }
    return 1;
}

NiftiDatatype datatype_from_string(const std::string& s)
{
    if (s == "uint8")
        return NiftiDatatype::Uint8;
    if (s == "int16")
        return NiftiDatatype::Int16;
    if (s == "float32")
        return NiftiDatatype::Float32;
    throw ConfigError("unknown datatype '" + s + "' (expected uint8, int16 or float32)");
}

std::string fmt_ms(double ms)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << ms;
    return os.str();
}

struct ManifestWriter {
    std::ostringstream os;

    explicit ManifestWriter(const std::string& command)
    {
        os << "# vtseg manifest v1\n";
        os << "tool_version " << kVersion << "\n";
        os << "command " << command << "\n";
    }
    void kv(const std::string& key, const std::string& value)
    {
        os << key << " " << value << "\n";
    }
    void config(const EffectiveConfig& cfg)
    {
        for (const std::string& key : cfg.keys())
            os << "config." << key << " " << cfg.value(key) << "\n";
        for (const std::string& key : cfg.keys())
            os << "config_source." << key << " " << to_string(cfg.source(key)) << "\n";
    }
    void timings(const StageTimings& t)
    {
        kv("timing_ms.harmonize", fmt_ms(t.harmonize_ms));
        kv("timing_ms.coarse", fmt_ms(t.coarse_ms));
        kv("timing_ms.centerline", fmt_ms(t.centerline_ms));
        kv("timing_ms.fine", fmt_ms(t.fine_ms));
        kv("timing_ms.postprocess", fmt_ms(t.postprocess_ms));
    }
    void save(const std::string& path) const
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot open manifest '" + path + "' for writing");
        f << os.str();
        if (!f)
            throw IoError("write error on manifest '" + path + "'");
    }
};

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    f << text;
    if (!f)
        throw IoError("write error on '" + path + "'");
}

std::string read_text_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "' for reading");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string case_id_of(const std::string& path)
{
    std::string name = std::filesystem::path(path).filename().string();
    for (const char* ext : {".nii.gz", ".nii"}) {
        const std::size_t len = std::string(ext).size();
        if (name.size() > len && name.compare(name.size() - len, len, ext) == 0)
            return name.substr(0, name.size() - len);
    }
    return name;
}

// ------------------------------------------------------------ subcommands

struct RunArgs {
    std::string input, output;
    std::string coarse_prob_out, coarse_mask_out, fine_prob_out;
    std::string centers_out, dense_centers_out, manifest_out;
    ConfigCli config;
    int workers = 0;
};

int cmd_run(const RunArgs& a)
{
    const EffectiveConfig effective = a.config.build();
    const PipelineConfig cfg = effective.materialize();
    const int workers = resolve_workers(a.workers);
    const Volume input = read_volume_file(a.input).volume;

    ManifestWriter manifest("run");
    manifest.kv("input", a.input);
    manifest.kv("workers", std::to_string(workers));
    manifest.config(effective);
    manifest.kv("stat.dims", format_int3(input.dims()));
    const std::size_t tile_count =
        plan_tiling(input.dims(), cfg.coarse_patch, cfg.coarse_stride).starts.size();
    manifest.kv("stat.tile_count", std::to_string(tile_count));

    try {
        const PipelineResult result = run(input, cfg, workers);

        write_volume_file(a.output, result.final_mask, {NiftiDatatype::Uint8});
        if (!a.coarse_prob_out.empty())
            write_volume_file(a.coarse_prob_out, result.coarse_prob, {NiftiDatatype::Float32});
        if (!a.coarse_mask_out.empty())
            write_volume_file(a.coarse_mask_out, result.coarse_mask, {NiftiDatatype::Uint8});
        if (!a.fine_prob_out.empty())
            write_volume_file(a.fine_prob_out, result.fine_prob, {NiftiDatatype::Float32});
        if (!a.centers_out.empty())
            write_centers_file(a.centers_out, result.centers);
        if (!a.dense_centers_out.empty())
            write_centers_file(a.dense_centers_out, result.dense_centers);

        manifest.kv("status", "ok");
        manifest.kv("output.final_mask", a.output);
        manifest.kv("stat.centers_dense", std::to_string(result.dense_centers.size()));
        manifest.kv("stat.centers_sparse", std::to_string(result.centers.size()));
        manifest.kv("stat.final_components", std::to_string(result.final_component_count));
        manifest.kv("stat.harmonized", result.harmonized ? "1" : "0");
        manifest.timings(result.timings);
        if (!a.manifest_out.empty())
            manifest.save(a.manifest_out);
        return exit_code::ok;
    } catch (const NoProposalError& e) {
        // still record the coarse stage so the run can be inspected
        if (!a.coarse_prob_out.empty())
            write_volume_file(a.coarse_prob_out, *e.coarse_prob, {NiftiDatatype::Float32});
        if (!a.coarse_mask_out.empty())
            write_volume_file(a.coarse_mask_out, *e.coarse_mask, {NiftiDatatype::Uint8});
        manifest.kv("status", "no-proposal");
        manifest.kv("stat.harmonized", e.harmonized ? "1" : "0");
        manifest.timings(e.timings);
        if (!a.manifest_out.empty())
            manifest.save(a.manifest_out);
        std::cerr << "vtseg run: " << e.what() << "\n";
        return exit_code::no_proposal;
    }
}

struct HarmonizeArgs {
    std::string input, output, tag, dtype;
};

int cmd_harmonize(const HarmonizeArgs& a)
{
    const SourceTag tag = source_tag_from_string(a.tag);
    const NiftiVolume in = read_volume_file(a.input);
    const Volume out = harmonize(in.volume, tag);
    NiftiWriteOptions opts;
    opts.datatype = a.dtype.empty() ? static_cast<NiftiDatatype>(in.header.datatype)
                                    : datatype_from_string(a.dtype);
    opts.preserve = &in.header;
    write_volume_file(a.output, out, opts);
    return exit_code::ok;
}

struct CoarseArgs {
    std::string input, prob_out, mask_out, manifest_out;
    ConfigCli config;
    int workers = 0;
};

int cmd_coarse(const CoarseArgs& a)
{
    const EffectiveConfig effective = a.config.build();
    const PipelineConfig cfg = effective.materialize();
    const int workers = resolve_workers(a.workers);
    const Volume input = read_volume_file(a.input).volume;
    const Volume harmonized = harmonize(input, cfg.source_tag);

    const Volume prob =
        run_coarse(harmonized, cfg.coarse_predictor, cfg.coarse_patch, cfg.coarse_stride, workers);
    write_volume_file(a.prob_out, prob, {NiftiDatatype::Float32});
    if (!a.mask_out.empty())
        write_volume_file(a.mask_out, binarize(prob, cfg.coarse_threshold),
                          {NiftiDatatype::Uint8});

    if (!a.manifest_out.empty()) {
        ManifestWriter manifest("coarse");
        manifest.kv("input", a.input);
        manifest.kv("workers", std::to_string(workers));
        manifest.config(effective);
        manifest.kv("status", "ok");
        manifest.kv("output.coarse_prob", a.prob_out);
        manifest.kv("stat.dims", format_int3(input.dims()));
        manifest.kv(
            "stat.tile_count",
            std::to_string(
                plan_tiling(input.dims(), cfg.coarse_patch, cfg.coarse_stride).starts.size()));
        manifest.save(a.manifest_out);
    }
    return exit_code::ok;
}

struct CenterlineArgs {
    std::string mask, centers_out, dense_out;
    ConfigCli config;
};

int cmd_centerline(const CenterlineArgs& a)
{
    const EffectiveConfig effective = a.config.build();
    const PipelineConfig cfg = effective.materialize();
    const Volume mask = read_volume_file(a.mask).volume;
    if (mask.kind() != VoxelKind::Label)
        throw FormatError("centerline expects a binary mask file");
    if ((mask.data() != 0.0).count() == 0) {
        std::cerr << "vtseg centerline: mask is empty (no vessel proposal)\n";
        return exit_code::no_proposal;
    }
    const CenterSet dense = pseudo_centerline(mask, cfg.connectivity2d);
    const CenterSet sparse = sparsify(dense, cfg.effective_d_min());
    write_centers_file(a.centers_out, sparse);
    if (!a.dense_out.empty())
        write_centers_file(a.dense_out, dense);
    return exit_code::ok;
}

struct RefineArgs {
    std::string input, coarse_prob, centers, output, fine_prob_out, manifest_out;
    ConfigCli config;
    int workers = 0;
};

int cmd_refine(const RefineArgs& a)
{
    const EffectiveConfig effective = a.config.build();
    const PipelineConfig cfg = effective.materialize();
    const int workers = resolve_workers(a.workers);

    const Volume input = read_volume_file(a.input).volume;
    const Volume harmonized = harmonize(input, cfg.source_tag);
    NiftiReadOptions prob_opts;
    prob_opts.kind_hint = VoxelKind::Probability;
    const Volume coarse_prob = read_volume_file(a.coarse_prob, prob_opts).volume;
    const CenterSet centers = read_centers_file(a.centers);
    for (const Index3& p : centers.points)
        if (!in_bounds(p, input.dims()))
            throw DomainError("center outside the input volume");

    const Volume fine_prob = refine_probability(harmonized, coarse_prob, centers, cfg, workers);
    const PostprocessResult post = postprocess(fine_prob, cfg);
    write_volume_file(a.output, post.mask, {NiftiDatatype::Uint8});
    if (!a.fine_prob_out.empty())
        write_volume_file(a.fine_prob_out, fine_prob, {NiftiDatatype::Float32});

    if (!a.manifest_out.empty()) {
        ManifestWriter manifest("refine");
        manifest.kv("input", a.input);
        manifest.kv("workers", std::to_string(workers));
        manifest.config(effective);
        manifest.kv("status", "ok");
        manifest.kv("output.final_mask", a.output);
        manifest.kv("stat.centers_sparse", std::to_string(centers.size()));
        manifest.kv("stat.final_components", std::to_string(post.component_count));
        manifest.save(a.manifest_out);
    }
    return exit_code::ok;
}

struct EvalArgs {
    std::vector<std::string> pred, truth;
    std::string ids; // comma-separated, optional
    std::string folds_path, report_out, aggregate_path;
    bool skip_hd = false;
};

int cmd_eval(const EvalArgs& a)
{
    std::ostringstream report;

    if (!a.aggregate_path.empty()) {
        // Aggregate mode: average pre-computed per-fold metric rows.
        std::istringstream is(read_text_file(a.aggregate_path));
        std::vector<MetricSummary> rows;
        std::string line;
        while (std::getline(is, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#')
                continue;
            std::istringstream ls(line);
            std::string label;
            MetricSummary m;
            if (!(ls >> label >> m.dsc >> m.iou >> m.recall >> m.precision))
                throw FormatError("aggregate row '" + line +
                                  "': expected label dsc iou recall precision");
            rows.push_back(m);
        }
        if (rows.empty())
            throw FormatError("aggregate file has no rows");
        const MetricSummary mean = aggregate_folds(rows);
        report << "# vtseg fold aggregate v1\n";
        report << "rows " << rows.size() << "\n";
        report << std::fixed << std::setprecision(1) << "average dsc "
               << round_pct_1dp(mean.dsc) << " iou " << round_pct_1dp(mean.iou) << " recall "
               << round_pct_1dp(mean.recall) << " precision " << round_pct_1dp(mean.precision)
               << "\n";
        if (a.report_out.empty())
            std::cout << report.str();
        else
            write_text_file(a.report_out, report.str());
        return exit_code::ok;
    }

    if (a.pred.empty() || a.pred.size() != a.truth.size())
        throw EvalError("eval requires matching --pred and --truth lists");
    std::vector<std::string> ids;
    if (!a.ids.empty()) {
        ids = split(a.ids, ',');
        if (ids.size() != a.pred.size())
            throw EvalError("--ids count does not match the case count");
    } else {
        for (const std::string& p : a.pred)
            ids.push_back(case_id_of(p));
    }

    std::vector<MetricsRow> rows;
    std::vector<std::string> failures;
    for (std::size_t i = 0; i < a.pred.size(); ++i) {
        try {
            const Volume pred = read_volume_file(a.pred[i]).volume;
            const Volume truth = read_volume_file(a.truth[i]).volume;
            if (pred.kind() != VoxelKind::Label || truth.kind() != VoxelKind::Label)
                throw EvalError("masks must be binary");
            if ((pred.dims() != truth.dims()).any())
                throw EvalError("dims mismatch");
            if (a.skip_hd) {
                const Confusion c = confusion(pred, truth);
                const CountingMetrics m = counting_metrics(c.tp, c.fp, c.fn);
                MetricsRow row;
                row.case_id = ids[i];
                row.dsc = m.dsc;
                row.iou = m.iou;
                row.recall = m.recall;
                row.precision = m.precision;
                row.both_empty = m.both_empty;
                rows.push_back(row);
            } else {
                rows.push_back(evaluate_case(ids[i], pred, truth));
            }
        } catch (const Error& e) {
            failures.push_back("case " + ids[i] + " error " + e.what());
        }
    }

    std::optional<FoldSplit> folds;
    if (!a.folds_path.empty())
        folds = folds_from_text(read_text_file(a.folds_path));

    std::string text = report_to_text(rows, folds ? &*folds : nullptr);
    for (const std::string& f : failures)
        text += f + "\n";
    if (a.report_out.empty())
        std::cout << text;
    else
        write_text_file(a.report_out, text);

    if (!failures.empty()) {
        for (const std::string& f : failures)
            std::cerr << "vtseg eval: " << f << "\n";
        return exit_code::eval_mismatch;
    }
    return exit_code::ok;
}

struct FoldsArgs {
    std::string ids_path, output;
    int k = 5;
    std::uint64_t seed = 0;
};

int cmd_folds(const FoldsArgs& a)
{
    std::vector<std::string> ids;
    std::istringstream is(read_text_file(a.ids_path));
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (!line.empty() && line[0] != '#')
            ids.push_back(line);
    }
    const FoldSplit split = make_folds(std::move(ids), a.k, a.seed);
    write_text_file(a.output, folds_to_text(split));
    return exit_code::ok;
}

struct PhantomArgs {
    std::string spec_path, hu_out, mask_out, axis_out, dtype = "float32";
    std::vector<std::string> sets;
};

int cmd_phantom(const PhantomArgs& a)
{
    PhantomSpec spec;
    if (!a.spec_path.empty())
        spec = phantom_spec_from_text(read_text_file(a.spec_path));
    if (!a.sets.empty()) {
        std::string overrides;
        for (const std::string& s : a.sets)
            overrides += s + "\n";
        // Re-parse on top of the file spec: same keys, flag precedence.
        PhantomSpec merged = phantom_spec_from_text(phantom_spec_to_text(spec) + overrides);
        spec = merged;
    }
    const PhantomPair pair = generate(spec);
    write_volume_file(a.hu_out, pair.hu, {datatype_from_string(a.dtype)});
    write_volume_file(a.mask_out, pair.mask, {NiftiDatatype::Uint8});
    if (!a.axis_out.empty()) {
        std::ostringstream os;
        for (const Vec3& p : axis_points(spec))
            os << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
               << format_double(p.z()) << '\n';
        write_text_file(a.axis_out, os.str());
    }
    return exit_code::ok;
}

int dispatch(const std::function<int()>& body)
{
    try {
        return body();
    } catch (const NoProposalError& e) {
        std::cerr << "vtseg: " << e.what() << "\n";
        return exit_code::no_proposal;
    } catch (const EvalError& e) {
        std::cerr << "vtseg: " << e.what() << "\n";
        return exit_code::eval_mismatch;
    } catch (const ConfigError& e) {
        std::cerr << "vtseg: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const DomainError& e) {
        std::cerr << "vtseg: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const IoError& e) {
        std::cerr << "vtseg: " << e.what() << "\n";
        return exit_code::io;
    } catch (const FormatError& e) {
        std::cerr << "vtseg: " << e.what() << "\n";
        return exit_code::io;
    } catch (const std::exception& e) {
        std::cerr << "vtseg: internal error: " << e.what() << "\n";
        return exit_code::internal;
    }
}

} // namespace

int run_cli(int argc, const char* const* argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run_cli(args);
}

int run_cli(const std::vector<std::string>& args)
{
    CLI::App app{"two-stage vessel-tree segmentation engine"};
    app.set_version_flag("--version", std::string("vtseg ") + kVersion);
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "full pipeline: coarse, centerline, refine");
    run_cmd->add_option("--input", run_args.input, "input HU volume (.nii/.nii.gz)")->required();
    run_cmd->add_option("--output", run_args.output, "final mask output")->required();
    run_cmd->add_option("--coarse-prob", run_args.coarse_prob_out, "save coarse probabilities");
    run_cmd->add_option("--coarse-mask", run_args.coarse_mask_out, "save coarse mask");
    run_cmd->add_option("--fine-prob", run_args.fine_prob_out, "save fused fine probabilities");
    run_cmd->add_option("--centers", run_args.centers_out, "save sparse centers");
    run_cmd->add_option("--dense-centers", run_args.dense_centers_out, "save dense centers");
    run_cmd->add_option("--manifest", run_args.manifest_out, "save run manifest");
    run_cmd->add_option("--workers", run_args.workers, "worker threads (default: $VTSEG_WORKERS or 1)");
    run_args.config.add_options(run_cmd);

    HarmonizeArgs harm_args;
    auto* harm_cmd = app.add_subcommand("harmonize", "apply the multi-center intensity shift");
    harm_cmd->add_option("--input", harm_args.input)->required();
    harm_cmd->add_option("--output", harm_args.output)->required();
    harm_cmd->add_option("--tag", harm_args.tag, "source tag (K, R, D, unknown)")->required();
    harm_cmd->add_option("--dtype", harm_args.dtype, "output datatype (default: keep input)");

    CoarseArgs coarse_args;
    auto* coarse_cmd = app.add_subcommand("coarse", "coarse sliding-window stage only");
    coarse_cmd->add_option("--input", coarse_args.input)->required();
    coarse_cmd->add_option("--out-prob", coarse_args.prob_out)->required();
    coarse_cmd->add_option("--out-mask", coarse_args.mask_out);
    coarse_cmd->add_option("--manifest", coarse_args.manifest_out);
    coarse_cmd->add_option("--workers", coarse_args.workers);
    coarse_args.config.add_options(coarse_cmd);

    CenterlineArgs center_args;
    auto* center_cmd = app.add_subcommand("centerline", "pseudo-centerline and sparse centers");
    center_cmd->add_option("--mask", center_args.mask)->required();
    center_cmd->add_option("--out-centers", center_args.centers_out)->required();
    center_cmd->add_option("--out-dense", center_args.dense_out);
    center_args.config.add_options(center_cmd);

    RefineArgs refine_args;
    auto* refine_cmd = app.add_subcommand("refine", "fine stage at given centers");
    refine_cmd->add_option("--input", refine_args.input)->required();
    refine_cmd->add_option("--coarse-prob", refine_args.coarse_prob)->required();
    refine_cmd->add_option("--centers", refine_args.centers)->required();
    refine_cmd->add_option("--output", refine_args.output)->required();
    refine_cmd->add_option("--fine-prob", refine_args.fine_prob_out);
    refine_cmd->add_option("--manifest", refine_args.manifest_out);
    refine_cmd->add_option("--workers", refine_args.workers);
    refine_args.config.add_options(refine_cmd);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "segmentation metrics report");
    eval_cmd->add_option("--pred", eval_args.pred, "predicted masks")->take_all();
    eval_cmd->add_option("--truth", eval_args.truth, "ground-truth masks")->take_all();
    eval_cmd->add_option("--ids", eval_args.ids, "comma-separated case ids");
    eval_cmd->add_option("--folds", eval_args.folds_path, "folds file for per-fold records");
    eval_cmd->add_option("--report", eval_args.report_out, "report path (default: stdout)");
    eval_cmd->add_option("--aggregate", eval_args.aggregate_path,
                         "aggregate mode: average rows of 'label dsc iou recall precision'");
    eval_cmd->add_flag("--no-hd", eval_args.skip_hd, "skip surface distances");

    FoldsArgs folds_args;
    auto* folds_cmd = app.add_subcommand("folds", "seeded k-fold split");
    folds_cmd->add_option("--ids", folds_args.ids_path, "file with one case id per line")
        ->required();
    folds_cmd->add_option("--k", folds_args.k)->required();
    folds_cmd->add_option("--seed", folds_args.seed)->required();
    folds_cmd->add_option("--output", folds_args.output)->required();

    PhantomArgs phantom_args;
    auto* phantom_cmd = app.add_subcommand("phantom", "generate a vessel-tree phantom pair");
    phantom_cmd->add_option("--spec", phantom_args.spec_path, "phantom spec file");
    phantom_cmd->add_option("--set", phantom_args.sets, "override a spec key (key=value)")
        ->take_all();
    phantom_cmd->add_option("--out-hu", phantom_args.hu_out)->required();
    phantom_cmd->add_option("--out-mask", phantom_args.mask_out)->required();
    phantom_cmd->add_option("--axis-out", phantom_args.axis_out, "save polyline vertices");
    phantom_cmd->add_option("--dtype", phantom_args.dtype, "HU output datatype");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_code::ok : exit_code::usage;
    }

    if (run_cmd->parsed())
        return dispatch([&] { return cmd_run(run_args); });
    if (harm_cmd->parsed())
        return dispatch([&] { return cmd_harmonize(harm_args); });
    if (coarse_cmd->parsed())
        return dispatch([&] { return cmd_coarse(coarse_args); });
    if (center_cmd->parsed())
        return dispatch([&] { return cmd_centerline(center_args); });
    if (refine_cmd->parsed())
        return dispatch([&] { return cmd_refine(refine_args); });
    if (eval_cmd->parsed())
        return dispatch([&] { return cmd_eval(eval_args); });
    if (folds_cmd->parsed())
        return dispatch([&] { return cmd_folds(folds_args); });
    if (phantom_cmd->parsed())
        return dispatch([&] { return cmd_phantom(phantom_args); });
    return exit_code::usage;
}

} // namespace vtseg
