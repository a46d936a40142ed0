#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "speckle/error.hpp"

int main(int argc, char** argv) {
    speckle::set_warnings_enabled(false);
    doctest::Context ctx(argc, argv);
    return ctx.run();
}
