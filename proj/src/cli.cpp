#include "genplan/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <exception>
#include <fstream>
#include <type_traits>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "genplan/features.hpp"
#include "genplan/pddl.hpp"
#include "genplan/planner.hpp"
#include "genplan/policy.hpp"
#include "genplan/strips.hpp"
#include "genplan/wrapper.hpp"

namespace genplan::cli {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNoSolution = 2;
constexpr int kBudget = 3;
constexpr int kInternal = 4;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

Budget make_budget(uint64_t nodes, double secs) {
    Budget b;
    b.max_nodes = nodes;
    if (secs > 0)
        b.deadline = std::chrono::steady_clock::now() +
                     std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                         std::chrono::duration<double>(secs));
    return b;
}

struct Loaded {
    strips::DomainSpec domain;
    std::vector<std::unique_ptr<strips::Instance>> instances;
};

Loaded load(const std::string& domain_path, const std::vector<std::string>& problem_paths) {
    Loaded out;
    out.domain = pddl::parse_domain(slurp(domain_path), domain_path);
    for (const auto& p : problem_paths) {
        auto spec = pddl::parse_problem(slurp(p), out.domain, p);
        out.instances.push_back(std::make_unique<strips::Instance>(out.domain, std::move(spec)));
    }
    return out;
}

//! Runs fn(i) for i in [0, count) on up to `jobs` threads; exceptions are
//! rethrown for the smallest index.
void for_each_index(uint32_t count, uint32_t jobs, const std::function<void(uint32_t)>& fn) {
    jobs = std::min(std::max(jobs, 1u), count);
    std::vector<std::exception_ptr> errs(count);
    if (jobs <= 1) {
        for (uint32_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<uint32_t> next{0};
        auto work = [&]() {
            for (;;) {
                uint32_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    errs[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> threads;
        for (uint32_t t = 0; t < jobs; ++t) threads.emplace_back(work);
        for (auto& th : threads) th.join();
    }
    for (uint32_t i = 0; i < count; ++i)
        if (errs[i]) std::rethrow_exception(errs[i]);
}

struct PlanOpts {
    std::string domain, problem, out;
    uint64_t node_budget = 0;
    double time_budget = 0;
};

int cmd_plan(const PlanOpts& o) {
    auto loaded = load(o.domain, {o.problem});
    const auto& inst = *loaded.instances[0];
    auto actions = strips::ground(inst);
    auto res = planner::solve(inst, actions, inst.initial_state(),
                              make_budget(o.node_budget, o.time_budget));
    if (auto* ob = std::get_if<planner::OutOfBudget>(&res)) {
        std::cerr << "budget exhausted after " << ob->expanded << " states\n";
        return kBudget;
    }
    if (auto* un = std::get_if<planner::Unsolvable>(&res)) {
        std::cerr << inst.name() << ": unsolvable (" << un->expanded << " states)\n";
        return kNoSolution;
    }
    const auto& plan = std::get<planner::Plan>(res);
    std::ostringstream text;
    for (uint32_t a : plan.actions) text << actions[a].name << "\n";
    text << "; length " << plan.length() << ", expanded " << plan.expanded << "\n";
    if (!o.out.empty()) spill(o.out, text.str());
    std::cout << text.str();
    return kOk;
}

struct PoolOpts {
    std::string domain, out;
    std::vector<std::string> problems;
    uint32_t complexity = 6, depth = 0;
    uint64_t node_budget = 0;
    double time_budget = 0;
};

int cmd_pool(const PoolOpts& o) {
    auto loaded = load(o.domain, o.problems);
    auto budget = make_budget(o.node_budget, o.time_budget);
    features::Sample sample;
    for (const auto& ip : loaded.instances) {
        auto actions = strips::ground(*ip);
        auto res = planner::solve(*ip, actions, ip->initial_state(), budget);
        if (std::holds_alternative<planner::OutOfBudget>(res)) {
            std::cerr << ip->name() << ": budget exhausted\n";
            return kBudget;
        }
        if (std::holds_alternative<planner::Unsolvable>(res)) {
            std::cerr << ip->name() << ": unsolvable, skipped\n";
            continue;
        }
        for (const auto& [s, t] : std::get<planner::Plan>(res).transitions)
            sample.push_back({ip.get(), s, t});
    }
    if (sample.empty()) {
        std::cerr << "no transitions to build a pool from\n";
        return kNoSolution;
    }
    auto pool = features::generate_pool(loaded.domain, sample, o.complexity, o.depth);
    std::string text = pool.to_json();
    if (!o.out.empty()) {
        spill(o.out, text);
        std::cout << "pool: " << pool.size() << " features -> " << o.out << "\n";
    } else {
        std::cout << text;
    }
    return kOk;
}

struct LearnOpts {
    std::string domain, out, report, pool_file, config;
    std::vector<std::string> problems;
    uint32_t complexity = 6, depth = 0, k = 1, jobs = 1;
    std::string strategy = "auto";
    bool simplify = false;
    uint64_t node_budget = 0;
    double time_budget = 0;
};

int cmd_learn(const LearnOpts& o) {
    auto loaded = load(o.domain, o.problems);
    std::vector<wrapper::TrainingInstance> training;
    for (std::size_t i = 0; i < loaded.instances.size(); ++i)
        training.push_back({o.problems[i], loaded.instances[i].get()});

    wrapper::Options wo;
    wo.complexity_bound = o.complexity;
    wo.depth_bound = o.depth;
    wo.k = o.k;
    wo.strategy = o.strategy == "s1"   ? wrapper::Strategy::S1
                  : o.strategy == "s2" ? wrapper::Strategy::S2
                                       : wrapper::Strategy::Auto;
    wo.simplify = o.simplify;
    wo.node_budget = o.node_budget;
    wo.time_budget = o.time_budget;
    wo.jobs = o.jobs;
    std::optional<features::FeaturePool> preset;
    if (!o.pool_file.empty()) {
        preset = features::FeaturePool::from_json(loaded.domain, slurp(o.pool_file));
        wo.pool = &*preset;
    }

    auto result = wrapper::learn(training, wo);
    if (auto* f = std::get_if<wrapper::LearnFailure>(&result)) {
        std::cerr << "learning failed (" << wrapper::reason_name(f->reason) << "): " << f->detail
                  << "\n";
        std::cerr << f->report.to_table();
        if (!o.report.empty()) spill(o.report, f->report.to_json());
        return f->reason == wrapper::FailReason::Timeout ? kBudget : kNoSolution;
    }
    auto& s = std::get<wrapper::LearnSuccess>(result);
    std::string text = policy::policy_to_json(s.policy, s.pool, &s.ranking);
    if (!o.out.empty()) spill(o.out, text);
    std::cout << policy::policy_to_text(s.policy, s.pool, &s.ranking);
    std::cout << s.report.to_table();
    if (!o.report.empty()) spill(o.report, s.report.to_json());
    if (o.out.empty()) std::cout << text;
    return kOk;
}

struct VerifyOpts {
    std::string domain, policy_file, report;
    std::vector<std::string> problems;
    uint32_t jobs = 1;
    uint64_t node_budget = 0;
    double time_budget = 0;
};

const char* verdict_name(policy::VerdictKind k) {
    switch (k) {
        case policy::VerdictKind::Solves: return "solves";
        case policy::VerdictKind::NotClosed: return "not-closed";
        case policy::VerdictKind::Unsafe: return "unsafe";
        case policy::VerdictKind::Cyclic: return "cyclic";
    }
    return "?";
}

int cmd_verify(const VerifyOpts& o) {
    auto loaded = load(o.domain, o.problems);
    auto lp = policy::policy_from_json(loaded.domain, slurp(o.policy_file));
    auto budget = make_budget(o.node_budget, o.time_budget);
    const uint32_t n = static_cast<uint32_t>(loaded.instances.size());
    std::vector<policy::Verdict> verdicts(n);
    for_each_index(n, o.jobs, [&](uint32_t i) {
        const auto& inst = *loaded.instances[i];
        auto actions = strips::ground(inst);
        planner::DeadEndCache cache(inst, actions);
        verdicts[i] = policy::analyze(inst, actions, lp.pool, lp.policy, cache, budget);
    });
    bool all_ok = true;
    nlohmann::json jrep = nlohmann::json::array();
    for (uint32_t i = 0; i < n; ++i) {
        const auto& v = verdicts[i];
        all_ok = all_ok && v.kind == policy::VerdictKind::Solves;
        std::cout << loaded.instances[i]->name() << ": " << verdict_name(v.kind) << " (visited "
                  << v.visited << ")\n";
        jrep.push_back({{"instance", loaded.instances[i]->name()},
                        {"verdict", verdict_name(v.kind)},
                        {"visited", v.visited}});
    }
    if (!o.report.empty()) spill(o.report, jrep.dump(2) + "\n");
    return all_ok ? kOk : kNoSolution;
}

struct WidthOpts {
    std::string domain, policy_file, report;
    std::vector<std::string> problems;
    int max_width = 2;
    uint32_t jobs = 1;
    uint64_t node_budget = 0;
    double time_budget = 0;
};

struct WidthRow {
    bool covered = false;
    int width = 0;        // max over trajectory segments
    uint64_t segments = 0;
    uint64_t steps = 0;   // ground actions applied
};

int cmd_width(const WidthOpts& o) {
    auto loaded = load(o.domain, o.problems);
    auto lp = policy::policy_from_json(loaded.domain, slurp(o.policy_file));
    auto budget = make_budget(o.node_budget, o.time_budget);
    const uint32_t n = static_cast<uint32_t>(loaded.instances.size());
    std::vector<WidthRow> rows(n);
    // One trajectory per instance: repeatedly take the cheapest (lowest-width)
    // serialized-search step whose endpoint the policy accepts.
    for_each_index(n, o.jobs, [&](uint32_t i) {
        const auto& inst = *loaded.instances[i];
        auto actions = strips::ground(inst);
        features::Evaluator ev(inst, lp.pool.registry());
        WidthRow row;
        strips::State cur = inst.initial_state();
        const uint64_t max_segments = 1000000;
        while (!strips::is_goal(inst, cur)) {
            auto vs = policy::policy_values(lp.policy, lp.pool, ev, cur);
            auto accept = [&](const strips::State&, const strips::State& cand) {
                return policy::compatible(lp.policy, vs,
                                          policy::policy_values(lp.policy, lp.pool, ev, cand));
            };
            auto seg = planner::iw_search(inst, actions, cur, o.max_width, accept, budget);
            if (!seg || row.segments >= max_segments) {
                rows[i] = row;
                return;
            }
            row.width = std::max(row.width, seg->width);
            row.steps += seg->actions.size();
            ++row.segments;
            cur = std::move(seg->state);
        }
        row.covered = true;
        rows[i] = row;
    });
    uint32_t covered = 0;
    int maxw = 0;
    nlohmann::json jrows = nlohmann::json::array();
    for (uint32_t i = 0; i < n; ++i) {
        const auto& r = rows[i];
        if (r.covered) {
            ++covered;
            maxw = std::max(maxw, r.width);
            std::cout << loaded.instances[i]->name() << ": goal, width " << r.width << ", "
                      << r.segments << " segments, " << r.steps << " steps\n";
        } else {
            std::cout << loaded.instances[i]->name() << ": stuck after " << r.segments
                      << " segments\n";
        }
        jrows.push_back({{"instance", loaded.instances[i]->name()},
                         {"covered", r.covered},
                         {"width", r.width},
                         {"segments", r.segments},
                         {"steps", r.steps}});
    }
    std::cout << "coverage " << covered << "/" << n << ", max width " << maxw << "\n";
    if (!o.report.empty()) {
        nlohmann::json jrep{{"schema", 1},
                            {"instances", jrows},
                            {"covered", covered},
                            {"total", n},
                            {"max_width", maxw}};
        spill(o.report, jrep.dump(2) + "\n");
    }
    return covered == n ? kOk : kNoSolution;
}

void add_budget_flags(CLI::App* cmd, uint64_t& nodes, double& secs) {
    cmd->add_option("--node-budget", nodes, "max states per search, 0 = unlimited");
    cmd->add_option("--time-budget", secs, "seconds for the whole command, 0 = unlimited");
}

//! key=value defaults for learn flags; every entry is validated, but a value
//! only lands in `o` when the command line did not set the flag itself.
int apply_learn_config(const CLI::App& learn, LearnOpts& o) {
    std::ifstream in(o.config);
    if (!in) {
        std::cerr << "cannot read config file: " << o.config << "\n";
        return kUsage;
    }
    auto trim = [](std::string s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        return s;
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = o.config + ":" + std::to_string(lineno);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::cerr << where << ": expected key=value\n";
            return kUsage;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const bool overridden = learn.count("--" + key) > 0;
        bool ok = true;
        auto num = [&](auto& slot) {
            try {
                std::size_t pos = 0;
                if constexpr (std::is_floating_point_v<std::decay_t<decltype(slot)>>) {
                    double v = std::stod(val, &pos);
                    if (pos == val.size() && !overridden) slot = v;
                } else {
                    unsigned long long v = std::stoull(val, &pos);
                    if (pos == val.size() && !overridden)
                        slot = static_cast<std::decay_t<decltype(slot)>>(v);
                }
                ok = pos == val.size();
            } catch (...) {
                ok = false;
            }
        };
        if (key == "complexity") num(o.complexity);
        else if (key == "depth") num(o.depth);
        else if (key == "k") num(o.k);
        else if (key == "jobs") num(o.jobs);
        else if (key == "node-budget") num(o.node_budget);
        else if (key == "time-budget") num(o.time_budget);
        else if (key == "strategy") {
            ok = val == "s1" || val == "s2" || val == "auto";
            if (ok && !overridden) o.strategy = val;
        } else if (key == "simplify") {
            ok = val == "true" || val == "false" || val == "1" || val == "0";
            if (ok && !overridden) o.simplify = val == "true" || val == "1";
        } else if (key == "pool") {
            if (!overridden) o.pool_file = val;
        } else if (key == "out") {
            if (!overridden) o.out = val;
        } else if (key == "report") {
            if (!overridden) o.report = val;
        } else {
            std::cerr << where << ": unknown key '" << key << "'\n";
            return kUsage;
        }
        if (!ok) {
            std::cerr << where << ": bad value '" << val << "' for " << key << "\n";
            return kUsage;
        }
    }
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"generalized policy learning over STRIPS domains"};
    app.require_subcommand(1);

    PlanOpts po;
    auto* plan = app.add_subcommand("plan", "shortest plan for one problem");
    plan->add_option("domain", po.domain, "domain file")->required();
    plan->add_option("problem", po.problem, "problem file")->required();
    plan->add_option("--out", po.out, "write the plan to a file");
    add_budget_flags(plan, po.node_budget, po.time_budget);

    PoolOpts fo;
    auto* pool = app.add_subcommand("pool", "generate a feature pool from solved problems");
    pool->add_option("domain", fo.domain, "domain file")->required();
    pool->add_option("problems", fo.problems, "problem files")->required();
    pool->add_option("--complexity", fo.complexity, "feature complexity bound");
    pool->add_option("--depth", fo.depth, "feature depth bound, 0 = unbounded");
    pool->add_option("--out", fo.out, "write the pool to a file");
    add_budget_flags(pool, fo.node_budget, fo.time_budget);

    LearnOpts lo;
    auto* learn = app.add_subcommand("learn", "learn a policy that solves the training problems");
    learn->add_option("domain", lo.domain, "domain file")->required();
    learn->add_option("problems", lo.problems, "training problem files")->required();
    learn->add_option("--complexity", lo.complexity, "feature complexity bound");
    learn->add_option("--depth", lo.depth, "feature depth bound, 0 = unbounded");
    learn->add_option("--k", lo.k, "support size bound for the ranking");
    learn->add_option("--strategy", lo.strategy, "active-set strategy")
        ->check(CLI::IsMember({"s1", "s2", "auto"}));
    learn->add_flag("--simplify", lo.simplify, "generalize the learned rules");
    learn->add_option("--jobs", lo.jobs, "parallel verification threads");
    learn->add_option("--pool", lo.pool_file, "reuse a feature pool file");
    learn->add_option("--out", lo.out, "write the policy to a file");
    learn->add_option("--report", lo.report, "write the run report to a file");
    learn->add_option("--config", lo.config, "key=value defaults for the flags above");
    add_budget_flags(learn, lo.node_budget, lo.time_budget);

    VerifyOpts vo;
    auto* verify = app.add_subcommand("verify", "check a policy on problems");
    verify->add_option("domain", vo.domain, "domain file")->required();
    verify->add_option("problems", vo.problems, "problem files")->required();
    verify->add_option("--policy", vo.policy_file, "policy file")->required();
    verify->add_option("--jobs", vo.jobs, "parallel instances");
    verify->add_option("--report", vo.report, "write verdicts to a file");
    add_budget_flags(verify, vo.node_budget, vo.time_budget);

    WidthOpts wo;
    auto* width = app.add_subcommand("width", "serialized-width trajectories under a policy");
    width->add_option("domain", wo.domain, "domain file")->required();
    width->add_option("problems", wo.problems, "problem files")->required();
    width->add_option("--policy", wo.policy_file, "policy file")->required();
    width->add_option("--max-width", wo.max_width, "largest per-segment width to try");
    width->add_option("--jobs", wo.jobs, "parallel instances");
    width->add_option("--report", wo.report, "write trajectory stats to a file");
    add_budget_flags(width, wo.node_budget, wo.time_budget);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (app.got_subcommand(plan)) return cmd_plan(po);
        if (app.got_subcommand(pool)) return cmd_pool(fo);
        if (app.got_subcommand(learn)) {
            if (!lo.config.empty())
                if (int rc = apply_learn_config(*learn, lo); rc != kOk) return rc;
            return cmd_learn(lo);
        }
        if (app.got_subcommand(verify)) return cmd_verify(vo);
        if (app.got_subcommand(width)) return cmd_width(wo);
        return kUsage;
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBudget;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.push_back("genplan");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace genplan::cli
