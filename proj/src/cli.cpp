#include "mixq/cli.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace mixq {

using nlohmann::json;

namespace {

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_keys(const json& j, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SchemaError("'" + ctx + "' must be an object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw SchemaError("unknown key '" + item.key() + "' in " + ctx);
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError("bad value for '" + std::string(key) + "': " + e.what());
    }
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

RunConfig run_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"schema_version", "model", "task", "prune", "codec", "adapter", "train",
                "search", "out_dir"});
    if (!j.contains("schema_version")) throw SchemaError("missing 'schema_version'");
    if (get_or<int>(j, "schema_version", 0) != 1) {
        throw SchemaError("unsupported schema_version (expected 1)");
    }

    RunConfig cfg;
    if (j.contains("model")) {
        const json& m = j.at("model");
        check_keys(m, "model", {"widths", "activation", "seed"});
        cfg.widths = get_or<std::vector<int>>(m, "widths", cfg.widths);
        if (m.contains("activation")) {
            cfg.activation = activation_from_string(m.at("activation").get<std::string>());
        }
        cfg.model_seed = get_or<std::uint64_t>(m, "seed", cfg.model_seed);
    }
    if (cfg.widths.size() < 3) {
        throw SchemaError("model.widths needs an input, at least one hidden, and an output width");
    }
    for (int w : cfg.widths) {
        if (w < 1) throw SchemaError("model.widths entries must be positive");
    }

    cfg.task.input_dim = cfg.widths.front();
    cfg.task.output_dim = cfg.widths.back();
    if (j.contains("task")) {
        const json& t = j.at("task");
        check_keys(t, "task", {"kind", "seed", "train", "val", "test", "separation", "noise"});
        if (t.contains("kind")) {
            cfg.task.kind = task_kind_from_string(t.at("kind").get<std::string>());
        }
        cfg.task.seed = get_or<std::uint64_t>(t, "seed", cfg.task.seed);
        cfg.task.sizes.train = get_or<int>(t, "train", cfg.task.sizes.train);
        cfg.task.sizes.val = get_or<int>(t, "val", cfg.task.sizes.val);
        cfg.task.sizes.test = get_or<int>(t, "test", cfg.task.sizes.test);
        cfg.task.separation = get_or<double>(t, "separation", cfg.task.separation);
        cfg.task.noise = get_or<double>(t, "noise", cfg.task.noise);
    }
    if (cfg.task.sizes.train < 1 || cfg.task.sizes.val < 1 || cfg.task.sizes.test < 1) {
        throw SchemaError("task split sizes must be positive");
    }
    if (cfg.task.kind == TaskKind::BlobsClassify && cfg.task.output_dim < 2) {
        throw SchemaError("blobs_classify needs an output width of at least 2");
    }

    if (j.contains("prune")) {
        const json& p = j.at("prune");
        check_keys(p, "prune", {"rate", "importance", "max_samples", "pretrain_epochs"});
        cfg.prune_rate = get_or<double>(p, "rate", cfg.prune_rate);
        if (p.contains("importance")) {
            cfg.importance = importance_order_from_string(p.at("importance").get<std::string>());
        }
        cfg.importance_samples = get_or<int>(p, "max_samples", cfg.importance_samples);
        cfg.pretrain_epochs = get_or<int>(p, "pretrain_epochs", cfg.pretrain_epochs);
    }
    if (cfg.prune_rate < 0.0 || cfg.prune_rate >= 1.0) {
        throw SchemaError("prune.rate must lie in [0, 1)");
    }
    if (cfg.pretrain_epochs < 0) throw SchemaError("prune.pretrain_epochs must be >= 0");

    if (j.contains("codec")) {
        const json& c = j.at("codec");
        check_keys(c, "codec", {"block_size", "kind_4bit", "kind_8bit"});
        cfg.plan.block_size = get_or<int>(c, "block_size", cfg.plan.block_size);
        if (c.contains("kind_4bit")) {
            cfg.plan.kinds.kind_4bit =
                codebook_kind_from_string(c.at("kind_4bit").get<std::string>());
        }
        if (c.contains("kind_8bit")) {
            cfg.plan.kinds.kind_8bit =
                codebook_kind_from_string(c.at("kind_8bit").get<std::string>());
        }
    }
    if (cfg.plan.block_size < 1) throw SchemaError("codec.block_size must be >= 1");
    if (cfg.plan.kinds.kind_8bit == CodebookKind::Fp4) {
        throw SchemaError("codec.kind_8bit cannot be fp4 (fp4 is 4-bit only)");
    }

    if (j.contains("adapter")) {
        const json& a = j.at("adapter");
        check_keys(a, "adapter", {"rank", "init", "loftq_iterations"});
        cfg.plan.rank = get_or<int>(a, "rank", cfg.plan.rank);
        if (a.contains("init")) {
            cfg.plan.adapter_init = adapter_init_from_string(a.at("init").get<std::string>());
        }
        cfg.plan.loftq_iterations = get_or<int>(a, "loftq_iterations", cfg.plan.loftq_iterations);
    }
    if (cfg.plan.rank < 0) throw SchemaError("adapter.rank must be >= 0");
    if (cfg.plan.loftq_iterations < 1) throw SchemaError("adapter.loftq_iterations must be >= 1");

    if (j.contains("train")) {
        const json& t = j.at("train");
        check_keys(t, "train", {"epochs", "lr", "batch", "train_biases"});
        cfg.plan.train.epochs = get_or<int>(t, "epochs", cfg.plan.train.epochs);
        cfg.plan.train.lr = get_or<double>(t, "lr", cfg.plan.train.lr);
        cfg.plan.train.batch = get_or<int>(t, "batch", cfg.plan.train.batch);
        cfg.plan.train.train_biases = get_or<bool>(t, "train_biases", cfg.plan.train.train_biases);
    }
    if (cfg.plan.train.epochs < 1 || cfg.plan.train.batch < 1) {
        throw SchemaError("train.epochs and train.batch must be >= 1");
    }

    if (j.contains("search")) {
        const json& s = j.at("search");
        check_keys(s, "search",
                   {"init_count", "max_iters", "lambda", "stabilize_window", "seed", "gp_refit"});
        cfg.plan.init_count = get_or<int>(s, "init_count", cfg.plan.init_count);
        cfg.plan.max_iters = get_or<int>(s, "max_iters", cfg.plan.max_iters);
        cfg.plan.lambda = get_or<double>(s, "lambda", cfg.plan.lambda);
        cfg.plan.stabilize_window = get_or<int>(s, "stabilize_window", cfg.plan.stabilize_window);
        cfg.plan.master_seed = get_or<std::uint64_t>(s, "seed", cfg.plan.master_seed);
        cfg.plan.gp.grid_refit = get_or<bool>(s, "gp_refit", cfg.plan.gp.grid_refit);
    }
    if (cfg.plan.init_count < 1) throw SchemaError("search.init_count must be >= 1");
    if (cfg.plan.max_iters < 0) throw SchemaError("search.max_iters must be >= 0");
    if (cfg.plan.lambda < 0.0) throw SchemaError("search.lambda must be >= 0");
    if (cfg.plan.stabilize_window < 1) throw SchemaError("search.stabilize_window must be >= 1");

    if (j.contains("out_dir")) {
        cfg.out_dir = j.at("out_dir").get<std::string>();
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return run_config_from_json_text(buf.str());
}

std::string RunConfig::canonical_json() const {
    json j;
    j["schema_version"] = 1;
    j["model"] = {{"widths", widths}, {"activation", to_string(activation)}, {"seed", model_seed}};
    j["task"] = {{"kind", to_string(task.kind)},  {"seed", task.seed},
                 {"train", task.sizes.train},     {"val", task.sizes.val},
                 {"test", task.sizes.test},       {"separation", task.separation},
                 {"noise", task.noise}};
    j["prune"] = {{"rate", prune_rate},
                  {"importance", to_string(importance)},
                  {"max_samples", importance_samples},
                  {"pretrain_epochs", pretrain_epochs}};
    j["codec"] = {{"block_size", plan.block_size},
                  {"kind_4bit", to_string(plan.kinds.kind_4bit)},
                  {"kind_8bit", to_string(plan.kinds.kind_8bit)}};
    j["adapter"] = {{"rank", plan.rank},
                    {"init", to_string(plan.adapter_init)},
                    {"loftq_iterations", plan.loftq_iterations}};
    j["train"] = {{"epochs", plan.train.epochs},
                  {"lr", plan.train.lr},
                  {"batch", plan.train.batch},
                  {"train_biases", plan.train.train_biases}};
    j["search"] = {{"init_count", plan.init_count},
                   {"max_iters", plan.max_iters},
                   {"lambda", plan.lambda},
                   {"stabilize_window", plan.stabilize_window},
                   {"seed", plan.master_seed},
                   {"gp_refit", plan.gp.grid_refit}};
    return j.dump();
}

std::string RunConfig::config_hash() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_bytes(canonical_json())));
    return buf;
}

Pipeline build_pipeline(const RunConfig& config) {
    Pipeline p{make_task(config.task), make_mlp(config.widths, config.activation,
                                                config.model_seed),
               {}, {}};
    if (config.pretrain_epochs > 0) {
        TrainHyper hyper = config.plan.train;
        hyper.epochs = config.pretrain_epochs;
        hyper.seed = mix_seed(config.model_seed, 0x9ae7ull);
        train_dense(p.dense, p.task, hyper);
    }
    p.groups = discover_groups(build_neuron_graph(p.dense));
    const TaylorStats stats =
        taylor_stats(p.dense, p.task, Split::Train, config.importance_samples);
    for (auto& g : p.groups) {
        g.importance = group_importance(g, p.dense, stats, config.importance);
    }
    p.pruned = prune(p.dense, p.groups, config.prune_rate);
    return p;
}

namespace {

void put_f64_array(std::string& out, const Matrix& m) {
    for (double v : m.data) {
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
    }
}

Matrix read_f64_array(std::istream& in, int rows, int cols) {
    Matrix m(rows, cols);
    for (double& v : m.data) {
        std::uint8_t b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        if (!in) throw std::runtime_error("pruned weights file truncated");
        std::uint64_t u = 0;
        for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        std::memcpy(&v, &u, 8);
    }
    return m;
}

} // namespace

void save_pruned(const PrunedModel& pruned, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["schema_version"] = 1;
    manifest["original_widths"] = pruned.original_widths;
    manifest["widths"] = pruned.model.widths;
    manifest["retained"] = pruned.retained;
    manifest["activation"] = to_string(pruned.model.activation);
    manifest["rate_requested"] = pruned.rate_requested;
    manifest["removed_fraction"] = pruned.removed_fraction;
    manifest["rate_reached"] = pruned.rate_reached;
    atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    std::string blob;
    for (int l = 0; l < pruned.model.num_layers(); ++l) {
        put_f64_array(blob, pruned.model.weights[static_cast<std::size_t>(l)]);
        put_f64_array(blob, pruned.model.biases[static_cast<std::size_t>(l)]);
    }
    atomic_write_file(dir / "weights.bin", blob);
}

PrunedModel load_pruned(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw std::runtime_error("cannot open " + (dir / "manifest.json").string());
    json manifest = json::parse(mf);

    PrunedModel pruned;
    pruned.original_widths = manifest.at("original_widths").get<std::vector<int>>();
    pruned.retained = manifest.at("retained").get<std::vector<std::vector<int>>>();
    pruned.rate_requested = manifest.at("rate_requested").get<double>();
    pruned.removed_fraction = manifest.at("removed_fraction").get<double>();
    pruned.rate_reached = manifest.at("rate_reached").get<bool>();
    pruned.model.widths = manifest.at("widths").get<std::vector<int>>();
    pruned.model.activation =
        activation_from_string(manifest.at("activation").get<std::string>());

    std::ifstream wf(dir / "weights.bin", std::ios::binary);
    if (!wf) throw std::runtime_error("cannot open " + (dir / "weights.bin").string());
    for (std::size_t l = 0; l + 1 < pruned.model.widths.size(); ++l) {
        pruned.model.weights.push_back(
            read_f64_array(wf, pruned.model.widths[l + 1], pruned.model.widths[l]));
        pruned.model.biases.push_back(read_f64_array(wf, pruned.model.widths[l + 1], 1));
    }
    return pruned;
}

namespace {

int workers_from_env() {
    const char* env = std::getenv("MIXQ_WORKERS");
    if (!env) return 0;
    int n = 0;
    const auto res = std::from_chars(env, env + std::strlen(env), n);
    if (res.ec != std::errc{} || n < 1) return 0;
    return n;
}

LogMeta make_meta(const RunConfig& cfg, const PrunedModel& pruned) {
    LogMeta meta;
    meta.config_hash = cfg.config_hash();
    meta.master_seed = cfg.plan.master_seed;
    meta.layers = static_cast<std::size_t>(pruned.adapter_layer_count());
    meta.lambda = cfg.plan.lambda;
    const MemoryBounds bounds =
        memory_bounds(pruned, cfg.plan.rank, cfg.plan.block_size, cfg.plan.kinds);
    meta.m_min = bounds.min_bytes;
    meta.m_max = bounds.max_bytes;
    return meta;
}

bool meta_consistent(const LogMeta& a, const LogMeta& b) {
    return a.config_hash == b.config_hash && a.master_seed == b.master_seed &&
           a.layers == b.layers;
}

// loads the pruned artifact when it matches this config, otherwise rebuilds
PrunedModel pruned_for(const RunConfig& cfg, Task& task_out, std::ostream& out) {
    const std::filesystem::path dir = cfg.out_dir / "pruned";
    task_out = make_task(cfg.task);
    const std::filesystem::path hash_file = dir / "config_hash.txt";
    if (std::filesystem::exists(dir / "manifest.json") &&
        std::filesystem::exists(hash_file)) {
        std::ifstream hf(hash_file);
        std::string stored;
        hf >> stored;
        if (stored == cfg.config_hash()) {
            out << "using pruned artifact in " << dir.string() << "\n";
            return load_pruned(dir);
        }
    }
    out << "deriving pruned model from config\n";
    return build_pipeline(cfg).pruned;
}

struct ExitWith {
    int code;
    std::string message;
};

} // namespace

int cmd_prune(const std::filesystem::path& config_path, const CommandOptions& opts,
              std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return exit_schema;
    }
    if (opts.out) cfg.out_dir = *opts.out;
    if (opts.seed) cfg.plan.master_seed = *opts.seed;

    try {
        const Pipeline p = build_pipeline(cfg);
        if (!p.pruned.rate_reached) {
            err << "prune rate " << cfg.prune_rate
                << " unreachable under the one-unit-per-layer floor (reached "
                << p.pruned.removed_fraction << ")\n";
            return exit_rate_unreachable;
        }
        const std::filesystem::path dir = cfg.out_dir / "pruned";
        save_pruned(p.pruned, dir);
        atomic_write_file(dir / "config_hash.txt", cfg.config_hash() + "\n");

        std::vector<std::size_t> order(p.groups.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return p.groups[a].importance < p.groups[b].importance;
        });
        out << "group  size  importance\n";
        for (std::size_t idx : order) {
            const PruneGroup& g = p.groups[idx];
            out << std::setw(5) << idx << "  " << std::setw(4)
                << group_parameter_count(g, p.dense) << "  "
                << format_double(g.importance) << "\n";
        }
        out << "removed fraction " << format_double(p.pruned.removed_fraction) << ", widths";
        for (int w : p.pruned.model.widths) out << " " << w;
        out << "\n";
        out << "pruned artifact written to " << dir.string() << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        err << "prune failed: " << e.what() << "\n";
        return exit_error;
    }
}

int cmd_tune(const std::filesystem::path& config_path, const CommandOptions& opts,
             std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return exit_schema;
    }
    if (opts.out) cfg.out_dir = *opts.out;
    if (opts.seed) cfg.plan.master_seed = *opts.seed;
    if (opts.lambda) cfg.plan.lambda = *opts.lambda;
    cfg.plan.workers = workers_from_env();
    if (!opts.bits) {
        err << "tune requires --bits\n";
        return exit_bits_mismatch;
    }

    try {
        Task task;
        const PrunedModel pruned = pruned_for(cfg, task, out);
        QuantConfig q;
        try {
            q = QuantConfig::from_digits(*opts.bits);
        } catch (const std::exception& e) {
            err << e.what() << "\n";
            return exit_bits_mismatch;
        }
        if (static_cast<int>(q.size()) != pruned.adapter_layer_count()) {
            err << "bits string length " << q.size() << " != adapter-bearing layer count "
                << pruned.adapter_layer_count() << "\n";
            return exit_bits_mismatch;
        }

        const std::filesystem::path log_path = cfg.out_dir / "records.jsonl";
        RunLog log;
        log.meta = make_meta(cfg, pruned);
        if (std::filesystem::exists(log_path)) {
            RunLog existing = read_records_log(log_path);
            if (!meta_consistent(existing.meta, log.meta)) {
                err << "existing log " << log_path.string()
                    << " belongs to a different config or seed\n";
                return exit_resume_mismatch;
            }
            log = std::move(existing);
        }

        const EvalRecord rec = evaluate_config(pruned, task, cfg.plan, q, 0, "tune");
        bool duplicate = false;
        for (const auto& prev : log.records) {
            if (prev.config == rec.config && prev.seed == rec.seed) {
                duplicate = true;
                break;
            }
        }
        log.records.push_back(rec);
        log.duplicate_flags.push_back(duplicate);
        write_records_log(log_path, log);

        out << "config " << rec.config.to_digits() << (duplicate ? " (duplicate)" : "")
            << (rec.failed ? " FAILED" : "") << "\n";
        out << "P " << format_double(rec.performance) << "\n";
        out << "M " << rec.memory_bytes << " bytes (base " << rec.breakdown.base_bytes
            << ", scales " << rec.breakdown.scale_bytes << ", codebook "
            << rec.breakdown.codebook_bytes << ", adapters " << rec.breakdown.adapter_bytes
            << ", optimizer " << rec.breakdown.optimizer_bytes << ")\n";
        return exit_ok;
    } catch (const std::exception& e) {
        err << "tune failed: " << e.what() << "\n";
        return exit_error;
    }
}

int cmd_search(const std::filesystem::path& config_path, const CommandOptions& opts,
               std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return exit_schema;
    }
    if (opts.out) cfg.out_dir = *opts.out;
    if (opts.seed) cfg.plan.master_seed = *opts.seed;
    if (opts.lambda) cfg.plan.lambda = *opts.lambda;
    cfg.plan.workers = workers_from_env();

    try {
        Task task;
        const PrunedModel pruned = pruned_for(cfg, task, out);
        const LogMeta meta = make_meta(cfg, pruned);
        const std::filesystem::path log_path = cfg.out_dir / "records.jsonl";

        ReplayMap replay;
        if (opts.resume && std::filesystem::exists(log_path)) {
            RunLog existing;
            try {
                existing = read_records_log(log_path);
            } catch (const std::exception& e) {
                err << "resume log unreadable: " << e.what() << "\n";
                return exit_bad_log;
            }
            if (!meta_consistent(existing.meta, meta)) {
                err << "resume log " << log_path.string()
                    << " belongs to a different config or seed (L or seed mismatch)\n";
                return exit_resume_mismatch;
            }
            for (const auto& rec : existing.records) replay.emplace(rec.config, rec);
            out << "resuming: " << replay.size() << " recorded evaluations will be replayed\n";
        }

        const SearchResult result =
            run_search(pruned, task, cfg.plan, replay.empty() ? nullptr : &replay, &out);

        RunLog log;
        log.meta = meta;
        log.records = result.records;
        log.duplicate_flags.assign(log.records.size(), false);
        write_records_log(log_path, log);

        const MemoryBounds bounds{meta.m_min, meta.m_max};
        atomic_write_file(cfg.out_dir / "frontier.csv",
                          frontier_csv(result.front, cfg.plan.lambda, bounds));

        json summary;
        summary["schema_version"] = log_schema_version;
        summary["config_hash"] = meta.config_hash;
        summary["q_star"] = result.best.config.to_digits();
        summary["P"] = result.best.performance;
        summary["M"] = result.best.memory_bytes;
        summary["objective"] =
            scalarized_objective(result.best, cfg.plan.lambda, bounds);
        summary["stop_reason"] = result.stop_reason;
        summary["iterations"] = result.iterations_completed;
        summary["init_count"] = cfg.plan.init_count;
        summary["records"] = result.records.size();
        summary["frontier_size"] = result.front.members.size();
        json audits = json::array();
        for (const auto& a : result.audits) {
            audits.push_back({{"iteration", a.iteration},
                              {"config", a.suggested.to_digits()},
                              {"ei", a.expected_improvement},
                              {"predicted_objective", a.predicted_objective},
                              {"gp_lengthscale", a.gp_lengthscale},
                              {"gp_noise_var", a.gp_noise_var},
                              {"gp_signal_var", a.gp_signal_var}});
        }
        summary["audit"] = std::move(audits);
        atomic_write_file(cfg.out_dir / "summary.json", summary.dump(2) + "\n");

        out << "stop: " << result.stop_reason << " after " << result.iterations_completed
            << " iterations, " << result.records.size() << " records\n";
        out << "q* " << result.best.config.to_digits() << "  P "
            << format_double(result.best.performance) << "  M " << result.best.memory_bytes
            << " bytes\n";
        out << "artifacts: records.jsonl, frontier.csv, summary.json in "
            << cfg.out_dir.string() << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        err << "search failed: " << e.what() << "\n";
        return exit_error;
    }
}

int cmd_report(const std::filesystem::path& log_path, const CommandOptions& opts,
               std::ostream& out, std::ostream& err) {
    RunLog log;
    try {
        log = read_records_log(log_path);
    } catch (const std::exception& e) {
        err << "log error: " << e.what() << "\n";
        return exit_bad_log;
    }

    try {
        const double lambda = opts.lambda.value_or(log.meta.lambda);
        const MemoryBounds bounds{log.meta.m_min, log.meta.m_max};
        const ParetoFront front = frontier(log.records);
        const EvalRecord& best = select(front, lambda, bounds);

        std::set<QuantConfig> front_configs;
        for (const auto& m : front.members) front_configs.insert(m.config);

        std::string csv = "config,P,M_bytes,M_norm,objective,frontier,selected\n";
        for (const auto& r : log.records) {
            csv += r.config.to_digits();
            csv += ',';
            csv += format_double(r.performance);
            csv += ',';
            csv += std::to_string(r.memory_bytes);
            csv += ',';
            csv += format_double(bounds.normalize(r.memory_bytes));
            csv += ',';
            csv += format_double(scalarized_objective(r, lambda, bounds));
            csv += ',';
            csv += front_configs.count(r.config) ? '1' : '0';
            csv += ',';
            csv += r.config == best.config ? '1' : '0';
            csv += '\n';
        }
        const std::filesystem::path dir =
            opts.out.value_or(log_path.has_parent_path() ? log_path.parent_path()
                                                         : std::filesystem::path("."));
        atomic_write_file(dir / "scatter.csv", csv);

        std::string report;
        report += "records: " + std::to_string(log.records.size()) + "\n";
        report += "frontier size: " + std::to_string(front.members.size()) + "\n";
        report += "lambda: " + format_double(lambda) + "\n";
        report += "selected q*: " + best.config.to_digits() + "\n";
        report += "selected P: " + format_double(best.performance) + "\n";
        report += "selected M: " + std::to_string(best.memory_bytes) + " bytes\n";
        report += "objective: " + format_double(scalarized_objective(best, lambda, bounds)) + "\n";
        report += "frontier (M asc):\n";
        for (const auto& m : front.members) {
            report += "  " + m.config.to_digits() + "  P " + format_double(m.performance) +
                      "  M " + std::to_string(m.memory_bytes) + "\n";
        }
        atomic_write_file(dir / "report.txt", report);
        out << report;
        out << "scatter data written to " << (dir / "scatter.csv").string() << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        err << "report failed: " << e.what() << "\n";
        return exit_error;
    }
}

} // namespace mixq
