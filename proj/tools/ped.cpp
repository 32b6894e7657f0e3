// Command line front end for the compressive print-error pipeline:
// dataset generation, measurement, training, evaluation, privacy audit.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "ped/classify.hpp"
#include "ped/dataset.hpp"
#include "ped/harness.hpp"
#include "ped/recovery.hpp"
#include "ped/sensing.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_generate(std::uint64_t seed, const std::string& scale_str,
                 const std::string& out_dir) {
  const double scale = scale_str == "full" ? 1.0 : std::stod(scale_str);
  const ped::DatasetManifest m = ped::generate_dataset(seed, scale);
  ped::write_dataset(m, out_dir);
  std::cout << "wrote " << m.entries.size() << " images to " << out_dir
            << "\n";
  return 0;
}

int cmd_compress(const std::string& data_dir, const std::vector<int>& m_list,
                 std::uint64_t seed, const std::string& out_dir) {
  const ped::DatasetManifest manifest = ped::load_dataset(data_dir);
  fs::create_directories(out_dir);
  for (int m : m_list) {
    const std::uint64_t mseed = ped::matrix_seed_for(seed, m);
    const ped::SensingMatrix mat(m, ped::kPaddedSize, mseed,
                                 ped::MeasureDomain::Wavelet);
    ped::SampleSet set;
    set.features.resize(
        static_cast<Eigen::Index>(manifest.entries.size()), m);
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
      const auto& e = manifest.entries[i];
      const ped::GrayImage img = ped::load_image(data_dir, e.image_id);
      const ped::Measurement y = ped::measure_coeffs(mat, img, e.image_id);
      set.features.row(static_cast<Eigen::Index>(i)) = y.values.transpose();
      set.labels.push_back(e.label == ped::Label::Good ? 0 : 1);
      set.ids.push_back(e.image_id);
      set.words.push_back(e.word);
    }
    const fs::path path =
        fs::path(out_dir) / ("measurements_m" + std::to_string(m) + ".csv");
    ped::write_measurement_csv(path, set, m, mseed,
                               ped::MeasureDomain::Wavelet);
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

int cmd_train(const std::string& meas_dir, const std::vector<std::string>& names,
              int train_per_label, std::uint64_t seed,
              const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& entry : fs::directory_iterator(meas_dir)) {
    const std::string fname = entry.path().filename().string();
    if (fname.rfind("measurements_m", 0) != 0) continue;
    const ped::SampleSet all = ped::read_measurement_csv(entry.path());
    const int m = static_cast<int>(all.features.cols());

    // stratified seeded split; the id list is persisted so evaluate can
    // verify holdout hygiene
    std::vector<int> train_rows, test_rows;
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<int> idx;
      for (int i = 0; i < all.size(); ++i)
        if (all.labels[static_cast<std::size_t>(i)] == cls) idx.push_back(i);
      std::mt19937_64 rng(ped::derive_seed(
          seed, cls == 0 ? "split_good" : "split_bad"));
      for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(ped::uniform_int(
                      rng, 0, static_cast<std::int64_t>(i) - 1))]);
      if (static_cast<int>(idx.size()) <= train_per_label)
        throw std::runtime_error("train: not enough samples per label");
      for (std::size_t i = 0; i < idx.size(); ++i)
        (static_cast<int>(i) < train_per_label ? train_rows : test_rows)
            .push_back(idx[i]);
    }
    const ped::SampleSet train_set = all.subset(train_rows);

    std::ofstream split_out(fs::path(out_dir) /
                            ("split_m" + std::to_string(m) + ".csv"));
    split_out << "image_id,role\n";
    for (int r : train_rows)
      split_out << all.ids[static_cast<std::size_t>(r)] << ",train\n";
    for (int r : test_rows)
      split_out << all.ids[static_cast<std::size_t>(r)] << ",test\n";

    for (const auto& name : names) {
      const ped::ClassifierKind kind = ped::classifier_kind_from_string(name);
      const auto grid = ped::default_grid(kind, m);
      ped::Hyperparams hp = grid.front();
      if (grid.size() > 1)
        hp = ped::kfold_cv(kind, train_set, grid, 5, seed).best;
      const ped::TrainedClassifier model = ped::train(kind, train_set, hp);
      const fs::path path = fs::path(out_dir) / ("model_" + name + "_m" +
                                                 std::to_string(m) + ".json");
      std::ofstream(path) << ped::to_json(model).dump(2) << '\n';
      std::cout << "wrote " << path.string() << "\n";
    }
  }
  return 0;
}

int cmd_evaluate(const std::string& model_dir, const std::string& meas_dir,
                 const std::string& out_path) {
  std::ofstream out(out_path);
  out << "classifier,m,accuracy,bad_as_good,good_as_bad\n";
  for (const auto& entry : fs::directory_iterator(model_dir)) {
    const std::string fname = entry.path().filename().string();
    if (fname.rfind("model_", 0) != 0) continue;
    // model_<kind>_m<M>.json
    const auto m_pos = fname.rfind("_m");
    const std::string kind_name = fname.substr(6, m_pos - 6);
    const int m = std::stoi(fname.substr(m_pos + 2));

    std::ifstream mf(entry.path());
    nlohmann::json j;
    mf >> j;
    const ped::TrainedClassifier model = ped::classifier_from_json(j);

    const ped::SampleSet all = ped::read_measurement_csv(
        fs::path(meas_dir) / ("measurements_m" + std::to_string(m) + ".csv"));
    std::set<std::string> train_ids;
    std::vector<int> test_rows;
    {
      std::ifstream split_in(fs::path(model_dir) /
                             ("split_m" + std::to_string(m) + ".csv"));
      if (!split_in)
        throw std::runtime_error("evaluate: missing split file for m=" +
                                 std::to_string(m));
      std::map<std::string, std::string> role;
      std::string line;
      std::getline(split_in, line);
      while (std::getline(split_in, line)) {
        const auto c = line.find(',');
        if (c != std::string::npos)
          role[line.substr(0, c)] = line.substr(c + 1);
      }
      for (int i = 0; i < all.size(); ++i) {
        const auto& id = all.ids[static_cast<std::size_t>(i)];
        if (role[id] == "train") train_ids.insert(id);
        else if (role[id] == "test") test_rows.push_back(i);
      }
    }
    const ped::EvalFragment frag =
        ped::evaluate_holdout(model, all.subset(test_rows), train_ids);
    out << kind_name << ',' << m << ',' << ped::fmt(frag.accuracy, 4) << ','
        << frag.bad_as_good << ',' << frag.good_as_bad << '\n';
  }
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_audit(std::uint64_t seed, double scale,
              const std::vector<std::string>& ids,
              const std::vector<int>& m_list, const std::string& out_dir) {
  ped::ExperimentConfig cfg;
  cfg.global_seed = seed;
  cfg.scale = scale;
  cfg.out_dir = out_dir;
  const ped::AuditReport report = ped::privacy_audit(cfg, ids, m_list);
  for (const auto& [m, p] : report.mean_psnr)
    std::cout << "m=" << m << " mean psnr=" << ped::fmt(p, 2) << " dB\n";
  std::cout << (report.pass ? "PASS" : "FAIL")
            << " (unreadable threshold " << cfg.audit_unreadable_psnr
            << " dB)\n";
  return 0;
}

int cmd_run_all(const std::string& config_path, bool full) {
  ped::ExperimentConfig cfg = config_path.empty()
                                  ? ped::ExperimentConfig{}
                                  : ped::load_config(config_path);
  if (full) cfg.apply_full_scale();
  const ped::RunRecord record = ped::run_experiment(cfg);

  std::vector<std::string> audit_ids = cfg.audit_ids;
  if (audit_ids.empty()) {
    // default: first three good words of the corpus
    int n = 0;
    for (const auto& e : record.manifest.entries) {
      if (e.label != ped::Label::Good) continue;
      audit_ids.push_back(e.image_id);
      if (++n == 3) break;
    }
  }
  const ped::AuditReport audit =
      ped::privacy_audit(cfg, audit_ids, cfg.audit_m_list);
  ped::write_misclass_report(
      fs::path(cfg.out_dir) / "misclass_report.csv",
      ped::misclass_report(record.eval, record.manifest));

  std::cout << "accuracy table: " << cfg.out_dir << "/accuracy_table.csv\n";
  for (const auto& [m, p] : audit.mean_psnr)
    std::cout << "audit m=" << m << " mean psnr=" << ped::fmt(p, 2) << " dB\n";
  std::cout << "audit " << (audit.pass ? "PASS" : "FAIL") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving compressive print-error detection"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string scale_str = "0.15";
  double scale = 0.15;
  std::string data_dir, out_dir = "out", meas_dir, model_dir, config_path;
  std::string eval_out = "evaluation.csv";
  std::vector<int> m_list = {200, 100, 50, 20, 10};
  std::vector<std::string> classifier_names = {"svm_rbf", "svm_cubic", "qd",
                                               "logreg", "ld"};
  std::vector<std::string> ids;
  int train_per_label = 2000;
  bool full = false;

  auto* gen = app.add_subcommand("generate", "render the labeled corpus");
  gen->add_option("--seed", seed, "global seed");
  gen->add_option("--scale", scale_str, "fraction of corpus or 'full'");
  gen->add_option("--out", out_dir, "output directory")->required();

  auto* comp = app.add_subcommand("compress", "measure a stored corpus");
  comp->add_option("--data", data_dir, "dataset directory")->required();
  comp->add_option("--m", m_list, "measurement counts");
  comp->add_option("--seed", seed, "key seed");
  comp->add_option("--out", out_dir, "output directory");

  auto* tr = app.add_subcommand("train", "fit classifiers on measurements");
  tr->add_option("--measurements", meas_dir, "measurement directory")
      ->required();
  tr->add_option("--classifiers", classifier_names, "classifier roster");
  tr->add_option("--train-per-label", train_per_label, "training set size");
  tr->add_option("--seed", seed, "split seed");
  tr->add_option("--out", out_dir, "output directory");

  auto* ev = app.add_subcommand("evaluate", "holdout evaluation");
  ev->add_option("--models", model_dir, "model directory")->required();
  ev->add_option("--measurements", meas_dir, "measurement directory")
      ->required();
  ev->add_option("--out", eval_out, "output CSV");

  auto* au = app.add_subcommand("audit", "best-case reconstruction attack");
  au->add_option("--ids", ids, "image ids to reconstruct")->required();
  au->add_option("--m", m_list, "measurement counts");
  au->add_option("--seed", seed, "key seed");
  au->add_option("--scale", scale, "corpus scale used to derive the ids");
  au->add_option("--out", out_dir, "output directory");

  auto* ra = app.add_subcommand("run-all", "full experiment pipeline");
  ra->add_option("--config", config_path, "flat key=value config file");
  ra->add_flag("--full", full, "full 17576+17576 corpus");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(seed, scale_str, out_dir);
    if (comp->parsed()) return cmd_compress(data_dir, m_list, seed, out_dir);
    if (tr->parsed())
      return cmd_train(meas_dir, classifier_names, train_per_label, seed,
                       out_dir);
    if (ev->parsed()) return cmd_evaluate(model_dir, meas_dir, eval_out);
    if (au->parsed()) return cmd_audit(seed, scale, ids, m_list, out_dir);
    if (ra->parsed()) return cmd_run_all(config_path, full);
  } catch (const std::exception& e) {
    const std::string stage = app.get_subcommands().empty()
                                  ? "unknown"
                                  : app.get_subcommands()[0]->get_name();
    std::cerr << "error in stage '" << stage << "': " << e.what() << "\n";
    return 1;
  }
  return 0;
}
