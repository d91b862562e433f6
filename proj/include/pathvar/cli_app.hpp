#pragma once

namespace pathvar {

// umbrella entry point; when argv[0] is one of the tool aliases
// (pathnorm, complexity, entropy, experiment) the group is implied
int run_cli(int argc, char** argv);

}  // namespace pathvar
