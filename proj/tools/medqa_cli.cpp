// medqa: train, evaluate and serve the hybrid question-answering engine.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "medqa/chat_json.hpp"
#include "medqa/corpus.hpp"
#include "medqa/embeddings.hpp"
#include "medqa/entities.hpp"
#include "medqa/intent.hpp"
#include "medqa/knowledge_graph.hpp"
#include "medqa/model_io.hpp"
#include "medqa/router.hpp"
#include "medqa/service.hpp"
#include "medqa/trainer.hpp"

namespace {

using nlohmann::ordered_json;
using namespace medqa;

struct TrainOptions {
  std::string config;
  std::string pairs;
  std::string vectors;
  std::string out;
  std::string loss_csv;
  std::optional<std::uint64_t> seed;
  bool json = false;
};

struct EvalOptions {
  std::string model;
  std::string vectors;
  std::string pairs;
  std::string scores;
  double threshold = 0.5;
  bool json = false;
};

struct FilterOptions {
  std::string pairs;
  std::string dictionary;
  std::string out;
  std::string qa;
  bool json = false;
};

struct StackOptions {
  std::string graph;
  std::string dictionary;
  std::string intents;
  std::string model;
  std::string vectors;
  std::string qa;
  std::size_t top_k = 3;
  double similarity_floor = 0.0;
  bool no_kg = false;
};

struct QueryOptions {
  std::string question;
  bool json = false;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
};

void report_row_errors(const std::vector<RowError>& errors, const std::string& what) {
  for (const auto& e : errors) std::cerr << what << " line " << e.line << ": " << e.message << '\n';
}

int cmd_train(const TrainOptions& opt) {
  TrainConfig config = load_train_config_file(opt.config);
  if (opt.seed) config.seed = *opt.seed;
  config.validate();
  const auto table = load_vectors_file(opt.vectors, config.embedding_dim, config.seed);
  const auto parsed = load_pairs_file(opt.pairs);
  report_row_errors(parsed.errors, opt.pairs);
  const auto pairs = to_labeled_pairs(parsed.rows);
  if (pairs.empty()) throw std::runtime_error("no usable pairs in " + opt.pairs);
  const auto [train_set, test_set] = split(pairs, config.train_fraction, config.seed);

  const auto start = std::chrono::steady_clock::now();
  const auto result = train(config, table, train_set, [&](std::size_t epoch, double loss) {
    if (!opt.json) std::cerr << "epoch " << epoch << " loss " << loss << '\n';
  });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_model_file(result.model, opt.out);
  if (!opt.loss_csv.empty()) {
    std::ofstream csv(opt.loss_csv);
    if (!csv) throw std::runtime_error("cannot write loss CSV: " + opt.loss_csv);
    write_loss_csv(result.loss_history, csv);
  }

  ordered_json doc{{"model", opt.out},
                   {"train_pairs", train_set.size()},
                   {"test_pairs", test_set.size()},
                   {"epochs", result.loss_history.size()},
                   {"first_loss", result.loss_history.front()},
                   {"final_loss", result.loss_history.back()},
                   {"seconds", seconds}};
  if (!test_set.empty()) {
    const auto report = evaluate(result.model, table, test_set);
    doc["test_accuracy"] = report.accuracy;
    doc["mean_similarity_positive"] = report.mean_similarity_positive;
    doc["mean_similarity_negative"] = report.mean_similarity_negative;
  }
  if (opt.json) {
    std::cout << doc.dump() << '\n';
  } else {
    std::cout << "wrote " << opt.out << " (" << train_set.size() << " train / " << test_set.size()
              << " test pairs)\n";
    if (doc.contains("test_accuracy")) {
      std::cout << "held-out accuracy " << doc["test_accuracy"].get<double>() << '\n';
    }
  }
  return 0;
}

/// `similarity,label` rows with a header line.
std::vector<std::pair<double, int>> load_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scores file: " + path);
  std::vector<std::pair<double, int>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    double score = 0.0;
    int label = 0;
    char comma = 0;
    if (!(fields >> score >> comma >> label) || comma != ',' || (label != 0 && label != 1)) {
      throw ParseError(line_no, "expected 'similarity,label' with label 0 or 1");
    }
    rows.emplace_back(score, label);
  }
  return rows;
}

int cmd_eval(const EvalOptions& opt) {
  EvalReport report;
  if (!opt.scores.empty()) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& [score, label] : load_scores(opt.scores)) {
      scores.push_back(score);
      labels.push_back(label);
    }
    report = evaluate_scores(scores, labels, opt.threshold);
  } else {
    if (opt.model.empty() || opt.vectors.empty() || opt.pairs.empty()) {
      throw std::invalid_argument("eval needs --scores, or --model with --vectors and --pairs");
    }
    const auto model = load_model_file(opt.model);
    const auto table =
        load_vectors_file(opt.vectors, model.params.embedding_dim, model.params.seed);
    const auto parsed = load_pairs_file(opt.pairs);
    report_row_errors(parsed.errors, opt.pairs);
    report = evaluate(model, table, to_labeled_pairs(parsed.rows), opt.threshold);
  }
  if (opt.json) {
    std::cout << ordered_json{{"accuracy", report.accuracy},
                              {"threshold", report.threshold},
                              {"n_correct", report.n_correct},
                              {"n_total", report.n_total},
                              {"n_positive", report.n_positive},
                              {"n_negative", report.n_negative},
                              {"mean_similarity_positive", report.mean_similarity_positive},
                              {"mean_similarity_negative", report.mean_similarity_negative}}
                     .dump()
              << '\n';
  } else {
    std::cout << "accuracy " << report.accuracy << " (" << report.n_correct << "/" << report.n_total
              << ") at threshold " << report.threshold << '\n';
  }
  return 0;
}

int cmd_filter(const FilterOptions& opt) {
  MedicalDictionary dict = load_dictionary_file(opt.dictionary);
  if (!opt.qa.empty()) {
    const auto records = load_qa_records_file(opt.qa);
    report_row_errors(records.errors, opt.qa);
    dict = restrict_dictionary(dict, tag_keywords(records.records, dict));
  }
  const auto automaton = build_automaton(dict);
  const auto parsed = load_pairs_file(opt.pairs);
  report_row_errors(parsed.errors, opt.pairs);
  const auto result = filter_medical(parsed.rows, dict, automaton);
  if (!opt.out.empty()) {
    std::ofstream out(opt.out);
    if (!out) throw std::runtime_error("cannot write filtered pairs: " + opt.out);
    write_pairs(result.kept, out);
  }
  if (opt.json) {
    std::cout << filter_report_json(result.report) << '\n';
  } else {
    std::cout << "kept " << result.report.rows_kept << " of " << result.report.rows_read
              << " rows\n";
  }
  return 0;
}

ServiceInputs load_stack(const StackOptions& opt) {
  ServiceInputs in;
  if (!opt.graph.empty()) in.graph = load_graph_file(opt.graph);
  if (!opt.dictionary.empty()) in.dictionary = load_dictionary_file(opt.dictionary);
  if (!opt.intents.empty()) in.rules = load_intent_rules_file(opt.intents);
  if (!opt.qa.empty()) {
    auto records = load_qa_records_file(opt.qa);
    report_row_errors(records.errors, opt.qa);
    in.records = std::move(records.records);
  }
  if (!opt.model.empty()) {
    if (opt.vectors.empty()) throw std::invalid_argument("--model needs --vectors");
    auto model = std::make_shared<const HbamModel>(load_model_file(opt.model));
    in.table = std::make_shared<const EmbeddingTable>(
        load_vectors_file(opt.vectors, model->params.embedding_dim, model->params.seed));
    in.model = std::move(model);
  }
  in.config.top_k = opt.top_k;
  in.config.similarity_floor = opt.similarity_floor;
  in.config.kg_enabled = !opt.no_kg;
  return in;
}

int cmd_query(const StackOptions& stack, const QueryOptions& opt) {
  ServiceState state(load_stack(stack));
  const auto result = state.chat(opt.question);
  if (opt.json) {
    std::cout << to_json(result.answer).dump() << '\n';
  } else {
    std::cout << "[" << to_string(result.answer.source) << "] " << result.answer.text << '\n';
    for (const auto& alt : result.answer.alternatives) {
      std::printf("  %.4f  %s\n", alt.similarity, alt.question.c_str());
    }
  }
  return 0;
}

int cmd_serve(const StackOptions& stack, const ServeOptions& opt) {
  ServiceState state(load_stack(stack));
  ChatServer server(state);
  const int port = server.bind(opt.host, opt.port);
  std::cerr << "listening on " << opt.host << ":" << port << '\n';
  serve_until_signal(server);
  std::cerr << "stopped\n";
  return 0;
}

void add_stack_options(CLI::App& cmd, StackOptions& opt) {
  cmd.add_option("--graph", opt.graph, "knowledge graph (JSON lines)")->check(CLI::ExistingFile);
  cmd.add_option("--dictionary", opt.dictionary, "disease/symptom dictionary")
      ->check(CLI::ExistingFile);
  cmd.add_option("--intents", opt.intents, "intent rules file")->check(CLI::ExistingFile);
  cmd.add_option("--model", opt.model, "trained model file")->check(CLI::ExistingFile);
  cmd.add_option("--vectors", opt.vectors, "word vectors file")->check(CLI::ExistingFile);
  cmd.add_option("--qa", opt.qa, "QA records (JSON lines)")->check(CLI::ExistingFile);
  cmd.add_option("--top-k", opt.top_k, "alternatives returned from the QA corpus")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--similarity-floor", opt.similarity_floor, "minimum QA similarity")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_flag("--no-kg", opt.no_kg, "skip the knowledge graph");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid knowledge-graph and Siamese-similarity medical QA"};
  app.require_subcommand(1);

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "train the similarity model");
  train_cmd->add_option("--config", train_opt.config, "key = value training config")->required();
  train_cmd->add_option("--pairs", train_opt.pairs, "labeled pairs TSV")->required();
  train_cmd->add_option("--vectors", train_opt.vectors, "word vectors file")->required();
  train_cmd->add_option("--out", train_opt.out, "model output path")->required();
  train_cmd->add_option("--loss-csv", train_opt.loss_csv, "per-epoch loss CSV output");
  train_cmd->add_option("--seed", train_opt.seed, "overrides the config seed");
  train_cmd->add_flag("--json", train_opt.json, "machine-readable summary");

  EvalOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("eval", "accuracy of a model or of a score file");
  eval_cmd->add_option("--model", eval_opt.model, "trained model file");
  eval_cmd->add_option("--vectors", eval_opt.vectors, "word vectors file");
  eval_cmd->add_option("--pairs", eval_opt.pairs, "labeled pairs TSV");
  eval_cmd->add_option("--scores", eval_opt.scores, "precomputed `similarity,label` CSV");
  eval_cmd->add_option("--threshold", eval_opt.threshold, "decision threshold");
  eval_cmd->add_flag("--json", eval_opt.json, "machine-readable report");

  FilterOptions filter_opt;
  auto* filter_cmd = app.add_subcommand("filter", "keep pairs that mention a medical term");
  filter_cmd->add_option("--pairs", filter_opt.pairs, "pairs TSV")->required();
  filter_cmd->add_option("--dictionary", filter_opt.dictionary, "dictionary file")->required();
  filter_cmd->add_option("--qa", filter_opt.qa, "restrict keywords to these records' tags");
  filter_cmd->add_option("--out", filter_opt.out, "write kept rows as TSV");
  filter_cmd->add_flag("--json", filter_opt.json, "print the filter report as JSON");

  StackOptions query_stack;
  QueryOptions query_opt;
  auto* query_cmd = app.add_subcommand("query", "answer one question");
  query_cmd->add_option("question", query_opt.question, "question text")->required();
  add_stack_options(*query_cmd, query_stack);
  query_cmd->add_flag("--json", query_opt.json, "print the chat answer as JSON");

  StackOptions serve_stack;
  ServeOptions serve_opt;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP chat and manager service");
  add_stack_options(*serve_cmd, serve_stack);
  serve_cmd->add_option("--host", serve_opt.host, "bind address");
  serve_cmd->add_option("--port", serve_opt.port, "TCP port (0 picks a free one)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(train_opt);
    if (*eval_cmd) return cmd_eval(eval_opt);
    if (*filter_cmd) return cmd_filter(filter_opt);
    if (*query_cmd) return cmd_query(query_stack, query_opt);
    if (*serve_cmd) return cmd_serve(serve_stack, serve_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
