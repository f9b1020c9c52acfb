#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "linktheft/errors.hpp"

namespace {

void print_usage() {
  std::cout <<
      "linktheft - link stealing attacks against graph neural networks\n"
      "\n"
      "usage: linktheft <subcommand> [options]\n"
      "\n"
      "subcommands:\n"
      "  train     train target/reference models, write checkpoints\n"
      "  attack    run attacks 0..7 across seeds, write results\n"
      "  serve     expose a checkpoint as a black-box oracle (TCP or stdio)\n"
      "  report    render aggregate tables and plot CSVs from results\n"
      "  baseline  conventional link prediction baseline\n"
      "  ablate    feature-group ablation for supervised attacks\n"
      "\n"
      "Options resolve as: flags > --config JSON file > LINKTHEFT_* env\n"
      "variables > defaults. Run 'linktheft <subcommand> --help' for flags.\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace linktheft::cli;
  if (argc < 2) {
    print_usage();
    return kExitConfigError;
  }
  const std::string sub = argv[1];
  if (sub == "--help" || sub == "-h" || sub == "help") {
    print_usage();
    return kExitOk;
  }
  std::vector<std::string> args(argv + 2, argv + argc);

  try {
    if (sub == "train") return cmd_train(args);
    if (sub == "attack") return cmd_attack(args);
    if (sub == "serve") return cmd_serve(args);
    if (sub == "report") return cmd_report(args);
    if (sub == "baseline") return cmd_baseline(args);
    if (sub == "ablate") return cmd_ablate(args);
    std::cerr << "unknown subcommand '" << sub << "'\n";
    print_usage();
    return kExitConfigError;
  } catch (const CLI::CallForHelp& e) {
    std::cout << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const linktheft::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const linktheft::IoError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const linktheft::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const linktheft::IntegrityError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}
