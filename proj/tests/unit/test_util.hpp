#pragma once

#include <gtest/gtest.h>

#include "eflow/core/error.hpp"

#define EXPECT_ERROR_KIND(statement, expected_kind)                          \
  do {                                                                       \
    try {                                                                    \
      statement;                                                             \
      ADD_FAILURE() << "expected " << ::eflow::to_string(expected_kind);     \
    } catch (const ::eflow::Error &e) {                                      \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                        \
    }                                                                        \
  } while (false)
