#include "msglon/cli.hpp"

int main(int argc, char** argv)
{
    return msglon::cli::dispatch(argc, argv);
}
