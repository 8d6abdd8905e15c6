// Command-line front end: serve, restream, simulate, analyze, latency-report.

#include <adt/adt.hpp>
#include <adt/dashboard_server.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

adt::Millis steady_ms() { return adt::SteadyClock{}.now_ms(); }

std::string format_opt(const std::optional<double>& v, int precision = 4) {
    if (!v) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << *v;
    return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto b = item.find_first_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : item.substr(b, item.find_last_not_of(" \t\r") - b + 1));
    }
    return out;
}

double to_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double d = std::stod(s, &used);
        if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
    throw adt::InputError(what + ": not a number: '" + s + "'");
}

/// `--times` accepts a file (numbers separated by commas or newlines) or an
/// inline comma-separated list.
std::vector<double> read_times(const std::string& arg) {
    std::string text = arg;
    if (std::ifstream in(arg); in) {
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    std::replace(text.begin(), text.end(), '\n', ',');
    std::vector<double> out;
    for (const auto& cell : split(text, ','))
        if (!cell.empty()) out.push_back(to_number(cell, "--times"));
    return out;
}

/// CSV with header `session,group_k,group_ripa,total_time_s`; empty cells
/// mean absent.
std::vector<adt::SessionSummary> read_summaries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw adt::InputError("cannot open summaries: " + path);
    std::string line;
    if (!std::getline(in, line)) throw adt::InputError(path + ": empty file");
    const auto header = split(line, ',');
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw adt::InputError(path + ": missing column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto c_session = column("session"), c_k = column("group_k"), c_ripa = column("group_ripa"),
               c_time = column("total_time_s");
    std::vector<adt::SessionSummary> out;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) throw adt::InputError(path + ":" + std::to_string(n) + ": wrong column count");
        adt::SessionSummary s;
        s.session_id = cells[c_session];
        const auto where = path + ":" + std::to_string(n);
        if (!cells[c_k].empty()) s.group_k = to_number(cells[c_k], where);
        if (!cells[c_ripa].empty()) s.group_ripa = to_number(cells[c_ripa], where);
        s.total_time_s = to_number(cells[c_time], where);
        out.push_back(std::move(s));
    }
    return out;
}

void print_correlation(std::ostream& os, const char* label, const adt::Correlation& c) {
    os << "pearson(" << label << ", total_time) ";
    if (c.r) os << "r = " << std::fixed << std::setprecision(5) << *c.r << " (n = " << c.n << ")\n";
    else os << "unavailable: " << c.note << " (n = " << c.n << ")\n";
}

nlohmann::json correlation_json(const adt::Correlation& c) {
    return {{"r", c.r ? nlohmann::json(*c.r) : nlohmann::json(nullptr)}, {"n", c.n}, {"note", c.note}};
}

void write_series(const std::map<std::string, std::vector<adt::MeasurePoint>>& series, std::ostream& os) {
    for (const auto& [chan, points] : series)
        for (const auto& p : points) os << adt::to_json(p).dump() << '\n';
}

struct ConfigOverrides {
    std::string file;
    std::vector<std::string> sets;

    void add_to(CLI::App* app) {
        app->add_option("--config", file, "Key-value session config file");
        app->add_option("--set", sets, "Config override key=value (repeatable)");
    }

    adt::SessionConfig build(std::vector<std::pair<std::string, std::string>>* extra = nullptr) const {
        std::stringstream text;
        if (!file.empty()) {
            std::ifstream in(file);
            if (!in) throw adt::InputError("cannot open config: " + file);
            text << in.rdbuf() << '\n';
        }
        for (const auto& s : sets) text << s << '\n';
        std::stringstream copy(text.str());
        auto kv = adt::parse_key_values(copy);
        adt::SessionConfig cfg;
        for (const auto& [k, v] : kv) {
            if (adt::apply_config_key(cfg, k, v)) continue;
            if (!extra) throw adt::InputError("unknown config key: " + k);
            extra->emplace_back(k, v);
        }
        cfg.detector.screen = cfg.screen;
        return cfg;
    }
};

/// Runs a live session fed by restream sources until they finish, the
/// session is stopped over HTTP, or the process is interrupted.
struct Runner {
    adt::Broker broker;
    adt::SessionRegistry registry;
    std::shared_ptr<adt::LiveSession> session;
    std::vector<std::unique_ptr<adt::RestreamSource<>>> sources;
    std::unique_ptr<adt::DashboardServer> server;

    explicit Runner(const adt::SessionConfig& cfg) {
        session = std::make_shared<adt::LiveSession>(cfg, steady_ms);
        session->attach(broker);
        registry.add(session);
    }

    void serve(const std::string& address, int port) {
        server = std::make_unique<adt::DashboardServer>(registry, address, static_cast<unsigned short>(port));
        server->start();
        std::cerr << "dashboard on http://" << address << ':' << server->port() << " (ws /ws/sessions/" << session->id()
                  << ")\n";
    }

    /// Returns once sources are done (and, if `linger`, until stopped).
    void run(bool linger) {
        session->request_sync();
        std::atomic<std::size_t> done{0};
        std::vector<std::jthread> threads;
        for (auto& src : sources)
            threads.emplace_back([&src, &done](std::stop_token st) {
                src->run(st);
                ++done;
            });
        while (session->running() && !g_interrupted) {
            session->tick();
            if (!linger && done == sources.size()) break;
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
        for (auto& t : threads) t.request_stop();
        threads.clear();
        session->stop();
        for (const auto& n : session->notices()) std::cerr << "notice: " << n << '\n';
    }
};

adt::SessionRecording source_recording(const std::string& spec, const std::string& user, const adt::SessionConfig& cfg,
                                       double synthetic_s) {
    if (spec.rfind("synthetic:", 0) == 0) {
        const auto parts = split(spec, ':');
        if (parts.size() != 3 || (parts[1] != "focal" && parts[1] != "ambient"))
            throw adt::InputError("source '" + spec + "': expected synthetic:<focal|ambient>:<seed>");
        const auto seed = static_cast<std::uint64_t>(to_number(parts[2], "seed"));
        const auto profile = parts[1] == "focal" ? adt::BehaviorProfile::focal(seed) : adt::BehaviorProfile::ambient(seed);
        adt::SyntheticOptions opts;
        opts.session_id = cfg.session_id;
        opts.user_id = user;
        opts.screen = cfg.screen;
        return adt::generate_synthetic(profile, synthetic_s * 1000.0, cfg.nominal_rate, opts);
    }
    return adt::rows_for_user(adt::load_recording_file(spec), user);
}

int cmd_serve(const ConfigOverrides& conf, bool exit_when_done) {
    std::vector<std::pair<std::string, std::string>> extra;
    auto cfg = conf.build(&extra);
    std::map<std::string, std::string> sources;
    int port = 8080;
    std::string address = "127.0.0.1";
    std::string record;
    adt::RestreamOptions ropts;
    double synthetic_s = 60.0;
    for (const auto& [k, v] : extra) {
        if (k.rfind("source.", 0) == 0) sources[k.substr(7)] = v;
        else if (k == "port") port = static_cast<int>(to_number(v, k));
        else if (k == "address") address = v;
        else if (k == "record") record = v;
        else if (k == "speed") ropts.speed = to_number(v, k);
        else if (k == "tick_ms") ropts.tick = to_number(v, k);
        else if (k == "synthetic_duration_s") synthetic_s = to_number(v, k);
        else throw adt::InputError("unknown config key: " + k);
    }
    if (cfg.user_ids.empty())
        for (const auto& [u, _] : sources) cfg.user_ids.push_back(u);
    cfg.validate();

    Runner runner(cfg);
    for (const auto& [u, spec] : sources) {
        if (std::find(cfg.user_ids.begin(), cfg.user_ids.end(), u) == cfg.user_ids.end())
            throw adt::InputError("source for undeclared user '" + u + "'");
        runner.sources.push_back(std::make_unique<adt::RestreamSource<>>(
            runner.broker, cfg.session_id, source_recording(spec, u, cfg, synthetic_s), ropts));
    }
    runner.serve(address, port);
    runner.run(!exit_when_done);
    if (!record.empty()) runner.session->persist(record);
    std::cout << adt::to_json(runner.session->summary()).dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Real-time attention analytics for eye-tracking sessions"};
    app.require_subcommand(1);

    ConfigOverrides serve_conf;
    bool exit_when_done = false;
    auto* serve = app.add_subcommand("serve", "Run a live session with dashboard endpoints");
    serve_conf.add_to(serve);
    serve->add_flag("--exit-when-done", exit_when_done, "Stop once every source has finished");

    ConfigOverrides rs_conf;
    std::string rs_path, rs_session = "replay", rs_user, rs_series, rs_record;
    double rs_speed = 1.0, rs_tick = 50.0;
    int rs_port = -1;
    auto* rs = app.add_subcommand("restream", "Replay a recording through a live session");
    rs->add_option("recording", rs_path, "Recording (JSONL)")->required()->check(CLI::ExistingFile);
    rs->add_option("--session", rs_session, "Session id");
    rs->add_option("--user", rs_user, "User id to publish as (default: recording's first user)");
    rs->add_option("--speed", rs_speed, "Playback speed factor")->check(CLI::PositiveNumber);
    rs->add_option("--tick-ms", rs_tick, "Scheduler tick in ms")->check(CLI::PositiveNumber);
    rs->add_option("--port", rs_port, "Also serve the dashboard endpoints on this port (0 = ephemeral)");
    rs->add_option("--series", rs_series, "Write measure series as JSONL");
    rs->add_option("--record", rs_record, "Persist the session recording");
    rs_conf.add_to(rs);

    int sim_users = 1;
    std::string sim_behavior = "focal", sim_out, sim_session = "sim";
    std::uint64_t sim_seed = 0;
    double sim_duration = 60.0, sim_rate = 30.0;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic multi-user recording");
    sim->add_option("--users", sim_users, "Number of users")->check(CLI::PositiveNumber);
    sim->add_option("--behavior", sim_behavior, "Attention profile")->check(CLI::IsMember({"ambient", "focal"}));
    sim->add_option("--seed", sim_seed, "Seed of user 0; user i uses seed + i");
    sim->add_option("--duration-s", sim_duration, "Duration in seconds")->check(CLI::PositiveNumber);
    sim->add_option("--rate", sim_rate, "Sample rate in Hz")->check(CLI::PositiveNumber);
    sim->add_option("--session", sim_session, "Session id");
    sim->add_option("--out", sim_out, "Output file (default stdout)");

    ConfigOverrides an_conf;
    std::vector<std::string> an_recs;
    std::string an_times, an_summaries;
    bool an_json = false;
    auto* an = app.add_subcommand("analyze", "Summaries and correlations across sessions");
    an->add_option("recordings", an_recs, "Recordings (JSONL)")->check(CLI::ExistingFile);
    an->add_option("--times", an_times, "Completion times in s per recording: CSV file or comma list");
    an->add_option("--summaries", an_summaries, "Precomputed rows: CSV session,group_k,group_ripa,total_time_s");
    an->add_flag("--json", an_json, "Print JSON instead of a table");
    an_conf.add_to(an);

    std::string lr_path;
    auto* lr = app.add_subcommand("latency-report", "Latency statistics of a live-captured recording");
    lr->add_option("recording", lr_path, "Recording (JSONL)")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    try {
        if (*serve) return cmd_serve(serve_conf, exit_when_done);

        if (*rs) {
            auto cfg = rs_conf.build();
            const auto rec = adt::load_recording_file(rs_path);
            if (rec.meta.user_ids.empty()) throw adt::InputError("recording declares no users");
            const std::string user = rs_user.empty() ? rec.meta.user_ids.front() : rs_user;
            cfg.session_id = rs_session;
            cfg.user_ids = {user};
            cfg.screen = rec.meta.screen;
            cfg.detector.screen = rec.meta.screen;
            cfg.nominal_rate = rec.meta.nominal_rate;
            auto rows = adt::rows_for_user(rec, user);
            if (!cfg.t0 && !rows.rows.empty()) cfg.t0 = rows.rows.front().t();
            cfg.validate();

            Runner runner(cfg);
            runner.sources.push_back(
                std::make_unique<adt::RestreamSource<>>(runner.broker, cfg.session_id, std::move(rows),
                                                        adt::RestreamOptions{rs_speed, rs_tick}));
            if (rs_port >= 0) runner.serve("127.0.0.1", rs_port);
            runner.run(false);
            if (!rs_record.empty()) runner.session->persist(rs_record);
            if (!rs_series.empty()) {
                std::ofstream out(rs_series);
                if (!out) throw adt::PersistenceError("cannot write " + rs_series);
                write_series(runner.session->series(), out);
            }
            std::cout << adt::to_json(runner.session->summary()).dump(2) << '\n';
            return 0;
        }

        if (*sim) {
            std::vector<adt::SessionRecording> parts;
            for (int i = 0; i < sim_users; ++i) {
                const auto seed = sim_seed + static_cast<std::uint64_t>(i);
                const auto profile =
                    sim_behavior == "focal" ? adt::BehaviorProfile::focal(seed) : adt::BehaviorProfile::ambient(seed);
                adt::SyntheticOptions opts;
                opts.session_id = sim_session;
                opts.user_id = "u" + std::to_string(i);
                parts.push_back(adt::generate_synthetic(profile, sim_duration * 1000.0, sim_rate, opts));
            }
            const auto rec = adt::merge_recordings(parts, sim_session);
            if (sim_out.empty()) adt::save_recording(rec, std::cout);
            else adt::save_recording_file(rec, sim_out);
            return 0;
        }

        if (*an) {
            std::vector<adt::SessionSummary> sessions;
            std::vector<double> times;
            if (!an_summaries.empty())
                for (auto& s : read_summaries(an_summaries)) {
                    times.push_back(s.total_time_s);
                    sessions.push_back(std::move(s));
                }
            std::vector<double> rec_times;
            if (!an_times.empty()) {
                rec_times = read_times(an_times);
                if (rec_times.size() != an_recs.size())
                    throw adt::InputError("--times: expected " + std::to_string(an_recs.size()) + " values, got " +
                                          std::to_string(rec_times.size()));
            }
            const auto base = an_conf.build();
            for (std::size_t i = 0; i < an_recs.size(); ++i) {
                auto run = adt::run_offline(adt::load_recording_file(an_recs[i]), base);
                times.push_back(rec_times.empty() ? run.summary.total_time_s : rec_times[i]);
                sessions.push_back(std::move(run.summary));
            }
            if (sessions.empty()) throw adt::InputError("analyze: no sessions given");
            const auto result = adt::analyze_offline(std::move(sessions), times);
            if (an_json) {
                nlohmann::json rows = nlohmann::json::array();
                for (const auto& s : result.sessions) rows.push_back(adt::to_json(s));
                std::cout << nlohmann::json{{"sessions", rows},
                                            {"k_vs_time", correlation_json(result.k_vs_time)},
                                            {"ripa_vs_time", correlation_json(result.ripa_vs_time)}}
                                 .dump(2)
                          << '\n';
            } else {
                std::cout << std::left << std::setw(16) << "session" << std::setw(12) << "group_k" << std::setw(12)
                          << "group_ripa" << "total_time_s\n";
                for (const auto& s : result.sessions)
                    std::cout << std::left << std::setw(16) << s.session_id << std::setw(12) << format_opt(s.group_k)
                              << std::setw(12) << format_opt(s.group_ripa) << format_opt(s.total_time_s, 1) << '\n';
                print_correlation(std::cout, "group_k", result.k_vs_time);
                print_correlation(std::cout, "group_ripa", result.ripa_vs_time);
            }
            return 0;
        }

        if (*lr) {
            const auto rec = adt::load_recording_file(lr_path);
            std::map<std::string, adt::LatencyAccumulator> per_user;
            adt::LatencyAccumulator all;
            for (const auto& row : rec.rows) {
                if (!row.received) continue;
                auto off = rec.meta.offsets.find(row.sample.user_id);
                const double origin = row.t() + (off == rec.meta.offsets.end() ? 0.0 : off->second);
                per_user[row.sample.user_id].add(origin, *row.received);
                all.add(origin, *row.received);
            }
            if (all.count() == 0) throw adt::InputError("recording has no arrival times (not a live capture)");
            auto line = [](const std::string& label, const adt::LatencyStats& s) {
                std::cout << std::left << std::setw(10) << label << s.format() << " ms  (n = " << s.count
                          << ", clamped = " << s.clamped << ")\n";
            };
            for (const auto& [u, acc] : per_user) line(u, acc.stats());
            line("all", all.stats());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "adt: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
