#ifndef LOCCLAB_HPP
#define LOCCLAB_HPP

#include "locclab/tensor.hpp"
#include "locclab/families.hpp"
#include "locclab/parallel.hpp"
#include "locclab/oppovm.hpp"
#include "locclab/protocol.hpp"
#include "locclab/completion.hpp"
#include "locclab/builtin_protocols.hpp"
#include "locclab/serialize.hpp"
#include "locclab/render.hpp"

#endif  // LOCCLAB_HPP
