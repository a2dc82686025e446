#ifndef BLOCH_CLI_HPP
#define BLOCH_CLI_HPP

namespace bloch {

// Command-line driver. Exit codes: 0 success, 2 topological obstruction
// (an expected physical outcome), 1 anything else.
int cli_main(int argc, const char* const* argv);

} // namespace bloch

#endif
