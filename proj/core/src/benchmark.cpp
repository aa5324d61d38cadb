#include "oabe/benchmark.hpp"

#include "oabe/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace oabe {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t hash = 0xCBF29CE484222325ULL)
{
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
    return out;
}

} // namespace

std::size_t BenchmarkReport::succeeded() const
{
    return static_cast<std::size_t>(
        std::count_if(datasets.begin(), datasets.end(), [](const DatasetResult& d) { return d.ok; }));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view dataset, std::size_t fold, std::string_view stream)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ fnv1a(dataset));
    h = splitmix64(h ^ static_cast<std::uint64_t>(fold));
    h = splitmix64(h ^ fnv1a(stream));
    return h;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task)
{
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = std::numeric_limits<std::size_t>::max();
    std::exception_ptr error;
    {
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (auto i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    try {
                        task(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        // keep the lowest failing index so the reported error does not depend on scheduling
                        if (i < error_index) {
                            error_index = i;
                            error = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

DatasetResult evaluate_dataset(const Dataset& dataset, const BenchmarkConfig& config)
{
    const auto n = dataset.size();
    const auto& methods = config.methods;
    const std::string& name = dataset.name();

    std::vector<std::size_t> sweep;
    for (auto k : config.k_sweep) {
        if (k >= 1 && k <= n - 1) {
            sweep.push_back(k);
        }
    }
    if (sweep.empty()) {
        throw ParameterError(fmt::format("no k setting of the sweep fits {} training projects", n - 1));
    }

    // estimates[method][setting][fold]; OABE has one setting.
    std::vector<std::vector<std::vector<double>>> estimates(methods.size());
    std::vector<std::vector<std::vector<std::size_t>>> ks(methods.size());
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        auto settings = methods[mi] == Method::Oabe ? 1 : sweep.size();
        estimates[mi].assign(settings, std::vector<double>(n, 0.0));
        ks[mi].assign(settings, std::vector<std::size_t>(n, 0));
    }

    parallel_for(n, config.jobs, [&](std::size_t fold) {
        auto split = make_split(dataset, fold);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const auto method = methods[mi];
            const auto tag = method_name(method);
            if (method == Method::Oabe) {
                BeesConfig bees = config.options.bees;
                bees.k_max = std::min(bees.k_max, split.train.size());
                EstimatorOptions options = config.options;
                options.bees = bees;
                auto record = estimate(method, split.test, split.train, 0, options, derive_seed(config.seed, name, fold, tag));
                estimates[mi][0][fold] = record.estimate;
                ks[mi][0][fold] = record.k;
                continue;
            }
            for (std::size_t si = 0; si < sweep.size(); ++si) {
                auto seed = derive_seed(config.seed, name, fold, fmt::format("{}/k{}", tag, sweep[si]));
                auto record = estimate(method, split.test, split.train, sweep[si], config.options, seed);
                estimates[mi][si][fold] = record.estimate;
                ks[mi][si][fold] = record.k;
            }
        }
    });

    DatasetResult result;
    result.name = name;
    for (const auto& p : dataset.projects()) {
        result.project_ids.push_back(p.id);
        result.actual.push_back(p.effort);
    }
    std::vector<std::vector<double>> abs_errors;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        std::size_t best = 0;
        double best_mmre = std::numeric_limits<double>::infinity();
        for (std::size_t si = 0; si < estimates[mi].size(); ++si) {
            double mmre = metrics(result.actual, estimates[mi][si]).mmre;
            if (mmre < best_mmre) {
                best_mmre = mmre;
                best = si;
            }
        }
        MethodResult mr;
        mr.method = methods[mi];
        mr.k = methods[mi] == Method::Oabe ? 0 : sweep[best];
        mr.chosen_k = ks[mi][best];
        mr.predicted = estimates[mi][best];
        mr.report = metrics(result.actual, mr.predicted);
        mr.report.method = std::string(method_name(methods[mi]));
        mr.report.dataset = name;
        abs_errors.push_back(mr.report.abs_errors);
        result.methods.push_back(std::move(mr));
    }
    result.mean_ranks = rank_summary(abs_errors);
    result.ok = true;
    return result;
}

std::map<Method, Tally> tournament(std::span<const DatasetResult> datasets, std::span<const Method> methods)
{
    std::map<Method, Tally> tallies;
    for (auto m : methods) {
        tallies[m];
    }
    for (const auto& d : datasets) {
        if (!d.ok) {
            continue;
        }
        for (auto measure : kAllMeasures) {
            for (std::size_t i = 0; i < d.methods.size(); ++i) {
                for (std::size_t j = i + 1; j < d.methods.size(); ++j) {
                    win_tie_loss(d.methods[i].report, d.methods[j].report, measure, tallies[d.methods[i].method],
                                 tallies[d.methods[j].method]);
                }
            }
        }
    }
    return tallies;
}

BenchmarkReport run_benchmark(std::span<const Dataset> datasets, const BenchmarkConfig& config)
{
    if (config.methods.empty()) {
        throw ParameterError("benchmark: no methods selected");
    }
    BenchmarkReport report;
    report.seed = config.seed;
    report.methods = config.methods;
    for (const auto& dataset : datasets) {
        try {
            report.datasets.push_back(evaluate_dataset(dataset, config));
        } catch (const std::exception& e) {
            record_failure(report, dataset.name(), e.what());
        }
    }
    report.tallies = tournament(report.datasets, report.methods);
    return report;
}

void record_failure(BenchmarkReport& report, std::string name, std::string error)
{
    DatasetResult failed;
    failed.name = std::move(name);
    failed.error = std::move(error);
    report.datasets.push_back(std::move(failed));
}

std::vector<std::filesystem::path> write_report(const BenchmarkReport& report, const std::filesystem::path& directory)
{
    std::filesystem::create_directories(directory);
    std::vector<std::filesystem::path> written;

    {
        auto path = directory / "metrics.csv";
        auto out = open_for_write(path);
        out << "dataset,method,k,n,MMRE,MdMRE,MMER,MBRE,Pred25\n";
        for (const auto& d : report.datasets) {
            for (const auto& m : d.methods) {
                const auto& r = m.report;
                out << fmt::format("{},{},{},{},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}\n", d.name, method_name(m.method),
                                   m.method == Method::Oabe ? std::string("auto") : std::to_string(m.k),
                                   r.mre.size(), r.mmre, r.mdmre, r.mmer, r.mbre, r.pred25);
            }
        }
        written.push_back(path);
    }
    {
        auto path = directory / "estimates.csv";
        auto out = open_for_write(path);
        out << "dataset,method,project,actual,predicted,k,MRE\n";
        for (const auto& d : report.datasets) {
            for (const auto& m : d.methods) {
                for (std::size_t p = 0; p < d.actual.size(); ++p) {
                    out << fmt::format("{},{},{},{:.6f},{:.6f},{},{:.6f}\n", d.name, method_name(m.method),
                                       d.project_ids[p], d.actual[p], m.predicted[p], m.chosen_k[p], m.report.mre[p]);
                }
            }
        }
        written.push_back(path);
    }
    {
        auto path = directory / "win_tie_loss.csv";
        auto out = open_for_write(path);
        out << "method,win,tie,loss,win_minus_loss\n";
        for (auto method : report.methods) {
            const auto& t = report.tallies.at(method);
            out << fmt::format("{},{},{},{},{}\n", method_name(method), t.win, t.tie, t.loss,
                               static_cast<long long>(t.win) - static_cast<long long>(t.loss));
        }
        written.push_back(path);
    }
    {
        auto path = directory / "mean_ranks.csv";
        auto out = open_for_write(path);
        out << "dataset,method,mean_rank\n";
        for (const auto& d : report.datasets) {
            for (std::size_t i = 0; i < d.methods.size(); ++i) {
                out << fmt::format("{},{},{:.4f}\n", d.name, method_name(d.methods[i].method), d.mean_ranks[i]);
            }
        }
        written.push_back(path);
    }
    {
        auto path = directory / "summary.md";
        auto out = open_for_write(path);
        out << "# Effort estimation benchmark\n\n";
        out << fmt::format("- seed: {}\n- datasets: {} ({} succeeded)\n- methods:", report.seed,
                           report.datasets.size(), report.succeeded());
        for (auto m : report.methods) {
            out << ' ' << method_name(m);
        }
        out << "\n\n## Accuracy (percent)\n\n";
        out << "| dataset | method | k | MMRE | MdMRE | MMER | MBRE | Pred25 | mean rank |\n";
        out << "|---|---|---|---|---|---|---|---|---|\n";
        for (const auto& d : report.datasets) {
            for (std::size_t i = 0; i < d.methods.size(); ++i) {
                const auto& m = d.methods[i];
                const auto& r = m.report;
                out << fmt::format("| {} | {} | {} | {:.1f} | {:.1f} | {:.1f} | {:.1f} | {:.1f} | {:.2f} |\n", d.name,
                                   method_name(m.method),
                                   m.method == Method::Oabe ? std::string("auto") : std::to_string(m.k), r.mmre,
                                   r.mdmre, r.mmer, r.mbre, r.pred25, d.mean_ranks[i]);
            }
        }
        out << "\n## Win-tie-loss\n\n| method | win | tie | loss |\n|---|---|---|---|\n";
        for (auto method : report.methods) {
            const auto& t = report.tallies.at(method);
            out << fmt::format("| {} | {} | {} | {} |\n", method_name(method), t.win, t.tie, t.loss);
        }
        bool any_failure = false;
        for (const auto& d : report.datasets) {
            if (!d.ok) {
                if (!any_failure) {
                    out << "\n## Failed datasets\n\n";
                    any_failure = true;
                }
                out << fmt::format("- {}: {}\n", d.name, d.error);
            }
        }
        written.push_back(path);
    }
    return written;
}

} // namespace oabe
