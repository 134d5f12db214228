#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>

#include "manirank/cli/commands.hpp"
#include "manirank/cli/io.hpp"
#include "manirank/mallows.hpp"
#include "report.hpp"

namespace manirank::cli {

namespace {

struct Config {
  std::optional<std::vector<std::pair<std::string, std::size_t>>> population;
  std::size_t per_cell = 1;
  std::optional<std::filesystem::path> candidates;
  std::optional<std::string> scenario;
  std::string tolerance = "0.05";
  std::optional<std::filesystem::path> modal;
  std::size_t num_rankings = 0;
  std::vector<std::string> theta_text;
  std::vector<double> thetas;
  std::vector<std::string> delta_text;  // ascending by value
  std::vector<std::string> methods;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::optional<std::chrono::milliseconds> time_budget;
  FairnessFlags fairness;
  std::optional<std::filesystem::path> out;
};

[[noreturn]] void bad_config(const std::string& file, const std::string& message) {
  throw ParseError(file, 1, std::nullopt, message);
}

std::string number_text(const Json& value, const std::string& file, const std::string& key) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) return value.dump();
  bad_config(file, "'" + key + "' entries must be numbers or decimal strings");
}

Config load_config(const std::filesystem::path& path, const std::string& bytes) {
  const std::string file = path.string();
  Json j;
  try {
    j = Json::parse(bytes);
  } catch (const Json::parse_error& e) {
    const auto offset = std::min<std::size_t>(e.byte, bytes.size());
    const auto row = 1 + static_cast<std::size_t>(std::count(bytes.begin(), bytes.begin() + offset, '\n'));
    throw ParseError(file, row, std::nullopt, "invalid JSON");
  }
  if (!j.is_object()) bad_config(file, "config must be a JSON object");
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) { const std::filesystem::path given(p);
    return given.is_absolute() ? given : base / given;
  };

  Config c;
  try {
    if (j.contains("population")) {
      const auto& pop = j.at("population");
      std::vector<std::pair<std::string, std::size_t>> attrs;
      for (const auto& a : pop.at("attributes")) attrs.emplace_back(a.at("name").get<std::string>(), a.at("values").get<std::size_t>());
      c.population = std::move(attrs);
      c.per_cell = pop.value("per_cell", std::size_t{1});
    }
    if (j.contains("candidates")) c.candidates = resolve(j.at("candidates").get<std::string>());
    if (j.contains("scenario")) c.scenario = j.at("scenario").get<std::string>();
    if (j.contains("scenario_tolerance")) c.tolerance = number_text(j.at("scenario_tolerance"), file, "scenario_tolerance");
    if (j.contains("modal")) c.modal = resolve(j.at("modal").get<std::string>());
    c.num_rankings = j.at("num_rankings").get<std::size_t>();
    for (const auto& t : j.at("thetas")) {
      c.theta_text.push_back(number_text(t, file, "thetas"));
      c.thetas.push_back(std::stod(c.theta_text.back()));
    }
    std::vector<std::pair<Rational, std::string>> deltas;
    for (const auto& d : j.at("deltas")) {
      const auto text = number_text(d, file, "deltas");
      deltas.emplace_back(Rational::parse_decimal(text, 6), text);
    }
    std::stable_sort(deltas.begin(), deltas.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& d : deltas) c.delta_text.push_back(std::move(d.second));
    c.methods = j.at("methods").get<std::vector<std::string>>();
    c.trials = j.value("trials", std::size_t{1});
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("time_budget_ms")) c.time_budget = std::chrono::milliseconds(j.at("time_budget_ms").get<std::int64_t>());
    if (j.contains("intersection")) {
      const auto& v = j.at("intersection");
      if (v.is_string()) {
        c.fairness.intersection = v.get<std::string>();
      } else {
        std::string joined;
        for (const auto& a : v) joined += (joined.empty() ? "" : ",") + a.get<std::string>();
        c.fairness.intersection = joined;
      }
    }
    if (j.contains("attributes")) c.fairness.attributes = j.at("attributes").get<std::string>();
    if (j.contains("out")) c.out = resolve(j.at("out").get<std::string>());
  } catch (const Json::exception& e) {
    bad_config(file, e.what());
  } catch (const std::invalid_argument& e) {
    bad_config(file, e.what());
  }

  if (c.population.has_value() == c.candidates.has_value()) bad_config(file, "give exactly one of population or candidates");
  if (c.scenario.has_value() == c.modal.has_value()) bad_config(file, "give exactly one of scenario or modal");
  if (c.thetas.empty() || c.delta_text.empty() || c.methods.empty()) bad_config(file, "thetas, deltas and methods must be non-empty");
  if (c.trials < 1 || c.num_rankings < 1) bad_config(file, "trials and num_rankings must be at least 1");
  for (const auto& m : c.methods)
    if (!is_method(m)) bad_config(file, "unknown method '" + m + "'");
  return c;
}

std::string fixed6(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", value);
  return buffer;
}

bool needs_exact_solver(std::string_view method) { return method == "kemeny" || method == "fair-kemeny"; }

struct Row {
  std::uint64_t seed = 0;
  std::string status = "ok";
  bool satisfied = false;
  std::vector<std::optional<Rational>> arp;  // per attribute column
  std::optional<Rational> irp;
  Rational pd_loss;
  std::optional<Rational> pof;
  std::optional<std::size_t> swaps;
  std::optional<std::int64_t> objective;
  std::optional<bool> optimal;
  double millis = 0;
};

}  // namespace

int cmd_experiment(const ExperimentOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string config_bytes = read_file(o.config);
    const Config c = load_config(o.config, config_bytes);
    const auto out_dir = o.out ? *o.out : c.out ? *c.out : std::filesystem::path("experiment");

    CandidateTable table = c.candidates ? parse_candidates(read_file(*c.candidates), c.candidates->string())
                                        : synthetic_population(*c.population, c.per_cell);
    const auto base_fairness = make_fairness(c.fairness, table);
    const auto full_index = build_group_index(table);
    Ranking modal;
    if (c.modal) {
      const auto set = parse_rankings(read_file(*c.modal), table, c.modal->string());
      if (set.size() != 1) throw ParseError(c.modal->string(), 2, std::nullopt, "modal file must hold exactly one ranking");
      modal = set[0];
    } else {
      Rational tolerance;
      try {
        tolerance = Rational::parse_decimal(c.tolerance, 6);
      } catch (const std::exception& e) {
        throw Error(ErrorKind::kInvalidInput, std::string("scenario_tolerance: ") + e.what());
      }
      modal = build_scenario(table, full_index, named_scenario(*c.scenario, full_index, tolerance), c.seed);
    }

    std::vector<Fairness> fairness;  // one per delta, ascending
    for (const auto& text : c.delta_text) {
      Fairness f = base_fairness;
      f.spec.delta_default = Rational::parse_decimal(text, 6);
      f.spec.validate();
      fairness.push_back(std::move(f));
    }
    std::vector<std::string> attr_names;
    for (const auto& e : base_fairness.index.attributes())
      if (e.num_groups() >= 2) attr_names.push_back(e.name);

    KemenyOptions options;
    options.time_budget = o.time_budget ? o.time_budget : c.time_budget ? c.time_budget : budget_from_env();
    const bool wants_exact = std::any_of(c.methods.begin(), c.methods.end(), [](const std::string& m) {
      return needs_exact_solver(m);
    });

    const std::size_t nm = c.methods.size(), nt = c.thetas.size(), nd = c.delta_text.size(), nr = c.trials;
    std::vector<Row> rows(nm * nt * nd * nr);
    auto at = [&](std::size_t m, std::size_t t, std::size_t d, std::size_t r) -> Row& {
      return rows[((m * nt + t) * nd + d) * nr + r];
    };

    for (std::size_t ti = 0; ti < nt; ++ti) {
      for (std::size_t trial = 0; trial < nr; ++trial) {
        const std::uint64_t seed = derive_seed(derive_seed(c.seed, ti), trial);
        const auto rankings = sample_mallows({modal, c.thetas[ti], c.num_rankings, seed});
        const auto precedence = build_precedence_matrix(rankings);
        std::optional<KemenySolver> solver;
        std::optional<Error> solver_error;
        if (wants_exact) {
          try {
            solver.emplace(precedence, options);
          } catch (const Error& e) {
            solver_error = e;
          }
        }
        for (std::size_t mi = 0; mi < nm; ++mi) {
          const auto& method = c.methods[mi];
          std::optional<Ranking> warm;
          for (std::size_t di = 0; di < nd; ++di) {
            Row& row = at(mi, ti, di, trial);
            row.seed = seed;
            const auto start = std::chrono::steady_clock::now();
            try {
              if (needs_exact_solver(method) && solver_error) throw *solver_error;
              const auto result = run_method(method, rankings, precedence, fairness[di],
                                             solver ? &*solver : nullptr, options, warm);
              row.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
              if (method == "fair-kemeny") warm = result.consensus;
              const auto report = mani_rank_check(result.consensus, fairness[di].spec, fairness[di].index);
              row.satisfied = report.satisfied;
              row.arp.assign(attr_names.size(), std::nullopt);
              for (const auto& e : report.entities) {
                if (!e.evaluated) continue;
                if (e.is_intersection) {
                  row.irp = e.score;
                  continue;
                }
                const auto pos = std::find(attr_names.begin(), attr_names.end(), e.name) - attr_names.begin();
                row.arp[static_cast<std::size_t>(pos)] = e.score;
              }
              row.pd_loss = pd_loss(precedence, result.consensus);
              if (result.unaware) row.pof = price_of_fairness(rankings, result.consensus, *result.unaware);
              row.swaps = result.swaps;
              if (result.exact) {
                row.objective = result.exact->objective;
                row.optimal = result.exact->optimal;
              }
            } catch (const Error& e) {
              row.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
              row.status = to_string(e.kind());
            }
          }
        }
      }
    }

    auto opt_decimal = [](const std::optional<Rational>& v) { return v ? v->to_decimal(6) : std::string(); };
    std::vector<std::string> header{"method", "theta", "delta", "trial", "seed", "status", "satisfied"};
    for (const auto& a : attr_names) header.push_back("arp:" + a);
    for (const auto& h : {"irp", "pd_loss", "pof", "swaps", "objective", "optimal", "millis"}) header.push_back(h);
    std::string results = format_csv_row(header);

    std::vector<std::string> summary_header{"method", "theta", "delta", "trials", "ok", "satisfied"};
    for (const auto& a : attr_names) summary_header.push_back("mean_arp:" + a);
    for (const auto& h : {"mean_irp", "mean_pd_loss", "mean_pof", "mean_swaps", "proven_optimal"})
      summary_header.push_back(h);
    std::string summary = format_csv_row(summary_header);

    for (std::size_t mi = 0; mi < nm; ++mi)
      for (std::size_t ti = 0; ti < nt; ++ti)
        for (std::size_t di = 0; di < nd; ++di) {
          std::size_t ok = 0, satisfied = 0, proven = 0, pof_count = 0, swap_count = 0, irp_count = 0;
          std::vector<double> arp_sum(attr_names.size(), 0.0);
          std::vector<std::size_t> arp_count(attr_names.size(), 0);
          double irp_sum = 0, loss_sum = 0, pof_sum = 0, swap_sum = 0;
          for (std::size_t r = 0; r < nr; ++r) {
            const Row& row = at(mi, ti, di, r);
            std::vector<std::string> cells{c.methods[mi], c.theta_text[ti], c.delta_text[di], std::to_string(r + 1),
                                           std::to_string(row.seed), row.status};
            if (row.status != "ok") {
              cells.resize(header.size());
              if (o.timing) cells.back() = fixed6(row.millis);
              results += format_csv_row(cells);
              continue;
            }
            cells.push_back(row.satisfied ? "true" : "false");
            for (std::size_t a = 0; a < attr_names.size(); ++a) cells.push_back(opt_decimal(row.arp[a]));
            cells.push_back(opt_decimal(row.irp));
            cells.push_back(row.pd_loss.to_decimal(6));
            cells.push_back(opt_decimal(row.pof));
            cells.push_back(row.swaps ? std::to_string(*row.swaps) : "");
            cells.push_back(row.objective ? std::to_string(*row.objective) : "");
            cells.push_back(row.optimal ? (*row.optimal ? "true" : "false") : "");
            cells.push_back(o.timing ? fixed6(row.millis) : "");
            results += format_csv_row(cells);

            ++ok;
            satisfied += row.satisfied;
            proven += row.optimal.value_or(false);
            for (std::size_t a = 0; a < attr_names.size(); ++a)
              if (row.arp[a]) {
                arp_sum[a] += row.arp[a]->to_double();
                ++arp_count[a];
              }
            if (row.irp) {
              irp_sum += row.irp->to_double();
              ++irp_count;
            }
            loss_sum += row.pd_loss.to_double();
            if (row.pof) {
              pof_sum += row.pof->to_double();
              ++pof_count;
            }
            if (row.swaps) {
              swap_sum += static_cast<double>(*row.swaps);
              ++swap_count;
            }
          }
          auto mean = [](double sum, std::size_t count) {
            return count ? fixed6(sum / static_cast<double>(count)) : std::string();
          };
          std::vector<std::string> cells{c.methods[mi], c.theta_text[ti], c.delta_text[di], std::to_string(nr),
                                         std::to_string(ok), std::to_string(satisfied)};
          for (std::size_t a = 0; a < attr_names.size(); ++a) cells.push_back(mean(arp_sum[a], arp_count[a]));
          cells.push_back(mean(irp_sum, irp_count));
          cells.push_back(mean(loss_sum, ok));
          cells.push_back(mean(pof_sum, pof_count));
          cells.push_back(mean(swap_sum, swap_count));
          cells.push_back(std::to_string(proven));
          summary += format_csv_row(cells);
        }

    write_file_atomic(out_dir / "modal.csv", format_ranking(modal, table));
    write_file_atomic(out_dir / "results.csv", results);
    write_file_atomic(out_dir / "summary.csv", summary);
    out << "wrote " << rows.size() << " result rows to " << (out_dir / "results.csv").string() << '\n';
    return int{kExitOk};
  });
}

}  // namespace manirank::cli
