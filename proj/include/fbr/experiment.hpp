#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbr {

inline constexpr const char* kLibraryVersion = "fbrnet 1.0.0";

/// Invalid or missing configuration value; `field` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// String key-value parameters with typed accessors. Lists accept either
/// comma-separated values or a `start:step:stop` range.
class Params {
public:
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return kv_; }

    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    double require_double(const std::string& key) const;
    long long get_int(const std::string& key, long long def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const;

    /// Keys in `other` override ours.
    void merge(const Params& other);

    /// `key = value` lines; '#' starts a comment.
    static Params parse(const std::string& text);
    static Params from_file(const std::string& path);

private:
    std::map<std::string, std::string> kv_;
};

/// Receives the table as it is produced; rows are written out immediately.
class RowSink {
public:
    virtual ~RowSink() = default;
    virtual void columns(const std::vector<std::string>& names) = 0;
    virtual void row(const std::vector<double>& values) = 0;
};

/// CSV writer: '#' provenance lines, a header row, then one line per row,
/// flushed after each so an interrupted run leaves its partial results.
class CsvSink : public RowSink {
public:
    CsvSink(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& provenance);
    void columns(const std::vector<std::string>& names) override;
    void row(const std::vector<double>& values) override;

private:
    std::ostream& out_;
    std::size_t width_ = 0;
};

/// Collects rows in memory.
struct TableSink : RowSink {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;

    void columns(const std::vector<std::string>& n) override { names = n; }
    void row(const std::vector<double>& v) override { rows.push_back(v); }
    /// Column by name; throws if absent.
    std::vector<double> column(const std::string& name) const;
};

struct RunContext {
    std::uint64_t seed = 1;
    int threads = 1;
    std::function<void(const std::string&)> log;  // may be empty
};

/// Commands: rate, rate-qam, outage, meta, simulate, mlpcm, interference-cdf,
/// kfunction, reliability, mlpcm-average.
std::vector<std::string> registered_commands();
void run_command(const std::string& command, const Params& params, const RunContext& ctx,
                 RowSink& sink);

struct ExperimentConfig {
    std::string id;
    Params params;  // overrides applied on top of the preset
    std::string out;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

std::vector<std::string> registered_experiments();

struct ExperimentRun {
    std::string command;
    Params params;
};

/// Runs making up an experiment id, with the config's params applied on top
/// of each. "custom" takes its command from params["command"].
std::vector<ExperimentRun> resolve_experiment(const ExperimentConfig& config);

/// Provenance lines: id, library version, seed, and every run's command and
/// parameters.
std::vector<std::pair<std::string, std::string>> provenance(const std::string& id,
                                                            const std::vector<ExperimentRun>& runs,
                                                            std::uint64_t seed);

void run_experiment(const ExperimentConfig& config, const RunContext& ctx, std::ostream& csv);

}  // namespace fbr
