#include "fieldlink/tools/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>

#include <CLI11.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>

#include "fieldlink/analytics/report.hpp"
#include "fieldlink/common/error.hpp"
#include "fieldlink/gateway/api.hpp"
#include "fieldlink/gateway/config.hpp"
#include "fieldlink/gateway/platform.hpp"
#include "fieldlink/gateway/server.hpp"
#include "fieldlink/neuralnet/dataset.hpp"
#include "fieldlink/neuralnet/metrics.hpp"
#include "fieldlink/neuralnet/serialize.hpp"
#include "fieldlink/neuralnet/train.hpp"
#include "fieldlink/seed/fixtures.hpp"
#include "fieldlink/store/document_store.hpp"
#include "fieldlink/vegindex/heatmap.hpp"
#include "fieldlink/vegindex/index.hpp"

namespace fieldlink::tools {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
}

gateway::ServerConfig config_at(const std::string& path) {
  return path.empty() ? gateway::config_from_json(nlohmann::json::object()) : gateway::load_config(path);
}

neuralnet::NetworkSpec arch_spec(const std::string& arch) {
  if (arch == "compact") return neuralnet::NetworkSpec::compact();
  return neuralnet::NetworkSpec::canonical();
}

void print_training(std::ostream& out, const neuralnet::TrainResult& result, const neuralnet::LabeledDataset& data) {
  out << "epochs " << result.loss_trace.size() << ", final loss " << std::setprecision(6)
      << (result.loss_trace.empty() ? 0.0 : result.loss_trace.back()) << "\n";
  out << "train items " << result.split.train.size() << ", test items " << result.split.test.size() << "\n";
  if (!result.split.test.empty()) {
    neuralnet::LabeledDataset held_out;
    for (const auto i : result.split.test) held_out.push_back(data[i]);
    out << "test accuracy " << neuralnet::evaluate(result.model, held_out).accuracy << "\n";
  }
}

// Harvested images are filed under the class folder so the corpus can be
// reloaded with load_dataset_dir.
void file_into_corpus(const fs::path& corpus, const diagnosis::HarvestedLabel& label) {
  const bool png = label.image_bytes.size() >= 4 && label.image_bytes[1] == 'P' && label.image_bytes[2] == 'N';
  write_file(corpus / std::string(neuralnet::class_name(label.label)) / (label.request_id + (png ? ".png" : ".jpg")),
             label.image_bytes);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Operator tool: serve the platform, manage the disease model, analyse images, seed and export data.",
               "fieldlink"};
  app.require_subcommand(1);
  std::function<void()> action;

  std::string config_path;

  auto* serve = app.add_subcommand("serve", "Run the HTTP API and realtime channel until interrupted");
  serve->add_option("--config", config_path, "Flat JSON config file")->check(CLI::ExistingFile);
  serve->callback([&] {
    action = [&] {
      const auto config = config_at(config_path);
      SystemClock clock;
      gateway::Platform platform(config, clock);
      gateway::Api api(platform);
      gateway::Server server(api, platform.hub(), config.listen_address, config.port, config.http_threads);
      platform.start_background();
      server.start();
      out << "listening on " << config.listen_address << ":" << server.port() << std::endl;
      boost::asio::io_context signals_ctx;
      boost::asio::signal_set signals(signals_ctx, SIGINT, SIGTERM);
      signals.async_wait([](const boost::system::error_code&, int) {});
      signals_ctx.run();
      server.stop();
      platform.stop();
      out << "stopped" << std::endl;
    };
  });

  std::string data_dir;
  std::string model_out;
  std::string arch = "canonical";
  neuralnet::TrainConfig train_cfg;
  auto* train = app.add_subcommand("train", "Train a classifier on <data>/<ClassName>/*.png|jpg");
  train->add_option("--data", data_dir, "Dataset root")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", model_out, "Model file to write")->required();
  train->add_option("--epochs", train_cfg.epochs, "Training epochs")->capture_default_str();
  train->add_option("--seed", train_cfg.seed, "Seed for init, split and augmentation")->capture_default_str();
  train->add_option("--learning-rate", train_cfg.learning_rate, "SGD step size")->capture_default_str();
  train->add_option("--batch-size", train_cfg.batch_size, "Mini-batch size")->capture_default_str();
  train->add_option("--arch", arch, "canonical (224x224 input) or compact (16x16)")
      ->check(CLI::IsMember({"canonical", "compact"}))
      ->capture_default_str();
  train->add_flag("!--no-augment", train_cfg.augmentation.enabled, "Disable augmentation");
  train->callback([&] {
    action = [&] {
      const auto data = neuralnet::load_dataset_dir(data_dir);
      auto result = neuralnet::train(neuralnet::Model::build(arch_spec(arch), train_cfg.seed), data, train_cfg);
      neuralnet::save_model_file(result.model, model_out);
      print_training(out, result, data);
      out << "model " << neuralnet::model_version_id(result.model) << " written to " << model_out << "\n";
    };
  });

  std::string model_path;
  auto* evaluate = app.add_subcommand("evaluate", "Print per-class precision, recall and F1 for a dataset");
  evaluate->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", data_dir, "Dataset root")->required()->check(CLI::ExistingDirectory);
  evaluate->callback([&] {
    action = [&] {
      const auto model = neuralnet::load_model_file(model_path);
      out << neuralnet::to_csv(neuralnet::evaluate(model, neuralnet::load_dataset_dir(data_dir)));
    };
  });

  std::string image_path;
  auto* predict = app.add_subcommand("predict", "Print class probabilities for one image");
  predict->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  predict->add_option("--image", image_path, "PNG or JPEG leaf image")->required()->check(CLI::ExistingFile);
  predict->callback([&] {
    action = [&] {
      const auto model = neuralnet::load_model_file(model_path);
      const auto image = vegindex::decode_rgb(read_file(image_path));
      const auto p = neuralnet::predict(model, neuralnet::image_to_tensor(image, model.input_shape()));
      out << "class,probability\n" << std::fixed << std::setprecision(6);
      for (const auto c : neuralnet::kAllClasses) out << neuralnet::class_name(c) << "," << p.probabilities[neuralnet::class_index(c)] << "\n";
      out << "top," << neuralnet::class_name(neuralnet::kAllClasses[p.top_index]) << "\n";
    };
  });

  std::string kind = "tgi";
  std::string heatmap_out;
  auto* index = app.add_subcommand("index", "Compute a vegetation index summary and heatmap");
  index->add_option("--image", image_path, "PNG or JPEG image")->required()->check(CLI::ExistingFile);
  index->add_option("--kind", kind, "tgi or grvi")->check(CLI::IsMember({"tgi", "grvi"}, CLI::ignore_case))->capture_default_str();
  index->add_option("--out", heatmap_out, "Heatmap PNG to write");
  index->callback([&] {
    action = [&] {
      const auto image = vegindex::decode_rgb(read_file(image_path));
      const auto map = vegindex::compute_index(vegindex::to_reflectance(image), vegindex::parse_index_kind(kind));
      out << vegindex::to_json(vegindex::summarize_index(map)).dump(2) << "\n";
      if (!heatmap_out.empty()) write_file(heatmap_out, vegindex::render_heatmap(map));
    };
  });

  std::string model_in;
  std::string corpus_dir;
  neuralnet::TrainConfig retrain_cfg;
  retrain_cfg.epochs = 20;
  auto* retrain = app.add_subcommand("harvest-retrain", "Collect confirmed diagnoses and continue training a model");
  retrain->add_option("--model-in", model_in, "Model to start from")->required()->check(CLI::ExistingFile);
  retrain->add_option("--model-out", model_out, "Model file to write")->required();
  retrain->add_option("--config", config_path, "Config naming the data directory")->check(CLI::ExistingFile);
  retrain->add_option("--corpus", corpus_dir, "Class-folder corpus that harvested images are added to; training uses all of it");
  retrain->add_option("--epochs", retrain_cfg.epochs, "Training epochs")->capture_default_str();
  retrain->add_option("--seed", retrain_cfg.seed, "Seed for split and augmentation")->capture_default_str();
  retrain->add_option("--learning-rate", retrain_cfg.learning_rate, "SGD step size")->capture_default_str();
  retrain->callback([&] {
    action = [&] {
      const auto config = config_at(config_path);
      SystemClock clock;
      gateway::Platform platform(config, clock);
      const auto labels = platform.diagnosis().harvest_training_labels();
      platform.stop();
      out << "harvested " << labels.size() << " labels\n";

      neuralnet::LabeledDataset data;
      if (!corpus_dir.empty()) {
        for (const auto& l : labels) file_into_corpus(corpus_dir, l);
        data = neuralnet::load_dataset_dir(corpus_dir);
      } else {
        for (const auto& l : labels) data.push_back({vegindex::decode_rgb(l.image_bytes), l.label});
      }
      if (data.empty()) throw Error(Errc::degenerate_dataset, "no labelled images to train on");
      auto result = neuralnet::train(neuralnet::load_model_file(model_in), data, retrain_cfg);
      neuralnet::save_model_file(result.model, model_out);
      print_training(out, result, data);
      out << "model " << neuralnet::model_version_id(result.model) << " written to " << model_out << "\n";
    };
  });

  std::string fixture;
  std::string first_day = "2020-01-01";
  std::size_t days = 90;
  std::uint64_t seed_value = 0;
  auto* seed = app.add_subcommand("seed", "Load a fixture into the data directory");
  seed->add_option("--fixture", fixture, "usage (accounts, farms, chats, listings, samples) or downloads (daily series)")
      ->required()
      ->check(CLI::IsMember({"usage", "downloads"}));
  seed->add_option("--config", config_path, "Config naming the data directory")->check(CLI::ExistingFile);
  seed->add_option("--start", first_day, "downloads: first day (YYYY-MM-DD)")->capture_default_str();
  seed->add_option("--days", days, "downloads: number of days")->capture_default_str();
  seed->add_option("--seed", seed_value, "downloads: noise seed")->capture_default_str();
  seed->callback([&] {
    action = [&] {
      const auto config = config_at(config_path);
      if (fixture == "downloads") {
        store::DocumentStore docs(config.data_dir, {.sync_writes = config.sync_writes});
        const auto series = seed::seed_downloads(docs, analytics::parse_day(first_day), days, seed_value);
        out << "recorded " << series.size() << " days of downloads\n";
        return;
      }
      SystemClock clock;
      gateway::Platform platform(config, clock);
      seed::seed_usage({platform.registry(), platform.chat(), platform.market(), platform.diagnosis(), clock});
      platform.wait_idle();
      const auto stats = analytics::compute_usage_stats(platform.docs());
      platform.stop();
      out << analytics::usage_csv(stats);
    };
  });

  std::string stats_out;
  auto* stats = app.add_subcommand("stats", "Export usage counts (.csv) or the download trend plot (.png)");
  stats->add_option("--out", stats_out, "Output file; the extension selects the format")->required();
  stats->add_option("--config", config_path, "Config naming the data directory")->check(CLI::ExistingFile);
  stats->callback([&] {
    action = [&] {
      const auto config = config_at(config_path);
      const auto ext = fs::path(stats_out).extension().string();
      if (ext != ".csv" && ext != ".png") throw Error(Errc::invalid_argument, "--out must end in .csv or .png");
      store::DocumentStore docs(config.data_dir, {.sync_writes = config.sync_writes});
      const auto format = ext == ".csv" ? analytics::ReportFormat::csv : analytics::ReportFormat::png;
      write_file(stats_out, analytics::export_report(docs, format, config.loess_span, config.loess_degree));
      out << "wrote " << stats_out << "\n";
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    action();
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    if (!e.details().is_null()) err << "details: " << e.details().dump() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace fieldlink::tools
