#pragma once

namespace podnolab {

// Entry point of the podnolab command-line tool. Returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace podnolab
