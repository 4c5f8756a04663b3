#pragma once

#include "mixq/autoloop.hpp"
#include "mixq/runlog.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace mixq {

// stable exit codes, as documented in the README
enum ExitCode : int {
    exit_ok = 0,
    exit_error = 1,            // unexpected I/O or internal failure
    exit_schema = 2,           // config fails schema validation
    exit_rate_unreachable = 3, // prune rate blocked by the per-layer floor
    exit_bits_mismatch = 4,    // --bits length != adapter-bearing layer count
    exit_resume_mismatch = 5,  // existing log disagrees with the config
    exit_bad_log = 6,          // empty or corrupt log
};

struct RunConfig {
    // model
    std::vector<int> widths{16, 32, 32, 32, 16};
    Activation activation = Activation::ReLU;
    std::uint64_t model_seed = 1;
    // task
    TaskSpec task;
    // prune
    double prune_rate = 0.2;
    ImportanceOrder importance = ImportanceOrder::Element1;
    int importance_samples = 256;
    int pretrain_epochs = 40;
    // codec + adapter + search
    SearchPlan plan;
    // output
    std::filesystem::path out_dir = "mixq_out";

    std::string canonical_json() const; // key-sorted dump the config hash covers
    std::string config_hash() const;
};

// Strict parse: unknown keys rejected at every level, schema_version required.
// Throws std::runtime_error with a message naming the offending key.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json_text(const std::string& text);

// deterministic pipeline stages shared by the commands
struct Pipeline {
    Task task;
    Mlp dense;          // pretrained toy model
    std::vector<PruneGroup> groups;
    PrunedModel pruned;
};
Pipeline build_pipeline(const RunConfig& config);

void save_pruned(const PrunedModel& pruned, const std::filesystem::path& dir);
PrunedModel load_pruned(const std::filesystem::path& dir);

struct CommandOptions {
    std::optional<std::string> bits;
    std::optional<double> lambda;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    bool resume = false;
};

int cmd_prune(const std::filesystem::path& config_path, const CommandOptions& opts,
              std::ostream& out, std::ostream& err);
int cmd_tune(const std::filesystem::path& config_path, const CommandOptions& opts,
             std::ostream& out, std::ostream& err);
int cmd_search(const std::filesystem::path& config_path, const CommandOptions& opts,
               std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& log_path, const CommandOptions& opts,
               std::ostream& out, std::ostream& err);

} // namespace mixq
