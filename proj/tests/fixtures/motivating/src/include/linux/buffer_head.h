/* SPDX-License-Identifier: GPL-2.0 */
/*
 * include/linux/buffer_head.h
 *
 * Everything to do with buffer_heads.
 *
 * Trimmed test fixture: line numbers of the helpers near the end match the
 * kernel tree the crash report was taken from.
 */

#ifndef _LINUX_BUFFER_HEAD_H
#define _LINUX_BUFFER_HEAD_H

#include <linux/types.h>
#include <linux/blk_types.h>
#include <linux/fs.h>
#include <linux/linkage.h>
#include <linux/pagemap.h>
#include <linux/wait.h>
#include <linux/atomic.h>

enum bh_state_bits {
	BH_Uptodate,	/* Contains valid data */
	BH_Dirty,	/* Is dirty */
	BH_Lock,	/* Is locked */
	BH_Req,		/* Has been submitted for I/O */

	BH_Mapped,	/* Has a disk mapping */
	BH_New,		/* Disk mapping was newly created by get_block */
	BH_Async_Read,	/* Is under end_buffer_async_read I/O */
	BH_Async_Write,	/* Is under end_buffer_async_write I/O */
	BH_Delay,	/* Buffer is not yet allocated on disk */
	BH_Boundary,	/* Block is followed by a discontiguity */
	BH_Write_EIO,	/* I/O error on write */
	BH_Unwritten,	/* Buffer is allocated on disk but not written */
	BH_Quiet,	/* Buffer Error Prinks to be quiet */
	BH_Meta,	/* Buffer contains metadata */
	BH_Prio,	/* Buffer should be submitted with REQ_PRIO */
	BH_Defer_Completion, /* Defer AIO completion to workqueue */

	BH_PrivateStart,/* not a state bit, but the first bit available
			 * for private allocation by other entities
			 */
};

#define MAX_BUF_PER_PAGE (PAGE_SIZE / 512)

struct page;
struct buffer_head;
struct address_space;
typedef void (bh_end_io_t)(struct buffer_head *bh, int uptodate);

struct buffer_head {
	unsigned long b_state;		/* buffer state bitmap (see above) */
	struct buffer_head *b_this_page;/* circular list of page's buffers */
	struct page *b_page;		/* the page this bh is mapped to */

	sector_t b_blocknr;		/* start block number */
	size_t b_size;			/* size of mapping */
	char *b_data;			/* pointer to data within the page */

	struct block_device *b_bdev;
	bh_end_io_t *b_end_io;		/* I/O completion */
	void *b_private;		/* reserved for b_end_io */
	struct list_head b_assoc_buffers; /* associated with another mapping */
	struct address_space *b_assoc_map;	/* mapping this buffer is
						   associated with */
	atomic_t b_count;		/* users using this buffer_head */
	spinlock_t b_uptodate_lock;	/* Used by the first bh in a page, to
					 * serialise IO completion of other
					 * buffers in the page */
};

void mark_buffer_dirty(struct buffer_head *bh);
void mark_buffer_write_io_error(struct buffer_head *bh);
void touch_buffer(struct buffer_head *bh);
void set_bh_page(struct buffer_head *bh,
		struct page *page, unsigned long offset);
int try_to_free_buffers(struct page *);
struct buffer_head *alloc_page_buffers(struct page *page, unsigned long size,
		bool retry);
void create_empty_buffers(struct page *, unsigned long,
			unsigned long b_state);
void end_buffer_read_sync(struct buffer_head *bh, int uptodate);
void end_buffer_write_sync(struct buffer_head *bh, int uptodate);
void end_buffer_async_write(struct buffer_head *bh, int uptodate);

void __wait_on_buffer(struct buffer_head *);
wait_queue_head_t *bh_waitq_head(struct buffer_head *bh);
struct buffer_head *__find_get_block(struct block_device *bdev, sector_t block,
			unsigned size);
struct buffer_head *__getblk_gfp(struct block_device *bdev, sector_t block,
				  unsigned size, gfp_t gfp);
void __brelse(struct buffer_head *);
void __bforget(struct buffer_head *);
void __breadahead(struct block_device *, sector_t block, unsigned int size);
struct buffer_head *__bread_gfp(struct block_device *,
				sector_t block, unsigned size, gfp_t gfp);
struct buffer_head *alloc_buffer_head(gfp_t gfp_flags);
void free_buffer_head(struct buffer_head * bh);
void unlock_buffer(struct buffer_head *bh);
void __lock_buffer(struct buffer_head *bh);
int sync_dirty_buffer(struct buffer_head *bh);
int __sync_dirty_buffer(struct buffer_head *bh, blk_opf_t op_flags);
void write_dirty_buffer(struct buffer_head *bh, blk_opf_t op_flags);
void submit_bh(blk_opf_t, struct buffer_head *);
void write_boundary_block(struct block_device *bdev,
			sector_t bblock, unsigned blocksize);
int bh_uptodate_or_lock(struct buffer_head *bh);
int __bh_read(struct buffer_head *bh, blk_opf_t op_flags, bool wait);
void __bh_read_batch(int nr, struct buffer_head *bhs[],
		     blk_opf_t op_flags, bool force_lock);

static inline void brelse(struct buffer_head *bh)
{
	if (bh)
		__brelse(bh);
}

static inline void bforget(struct buffer_head *bh)
{
	if (bh)
		__bforget(bh);
}

static inline struct buffer_head *
sb_bread(struct super_block *sb, sector_t block)
{
	return __bread_gfp(sb->s_bdev, block, sb->s_blocksize, __GFP_MOVABLE);
}

static inline void
sb_breadahead(struct super_block *sb, sector_t block)
{
	__breadahead(sb->s_bdev, block, sb->s_blocksize);
}

static inline struct buffer_head *
sb_getblk(struct super_block *sb, sector_t block)
{
	return __getblk_gfp(sb->s_bdev, block, sb->s_blocksize, __GFP_MOVABLE);
}

static inline struct buffer_head *
sb_find_get_block(struct super_block *sb, sector_t block)
{
	return __find_get_block(sb->s_bdev, block, sb->s_blocksize);
}

static inline void
map_bh(struct buffer_head *bh, struct super_block *sb, sector_t block)
{
	set_buffer_mapped(bh);
	bh->b_bdev = sb->s_bdev;
	bh->b_blocknr = block;
	bh->b_size = sb->s_blocksize;
}

static inline void wait_on_buffer(struct buffer_head *bh)
{
	might_sleep();
	if (buffer_locked(bh))
		__wait_on_buffer(bh);
}

int buffer_fixture_helper_0(struct buffer_head *bh);
int buffer_fixture_helper_1(struct buffer_head *bh);
int buffer_fixture_helper_2(struct buffer_head *bh);
int buffer_fixture_helper_3(struct buffer_head *bh);
int buffer_fixture_helper_4(struct buffer_head *bh);
int buffer_fixture_helper_5(struct buffer_head *bh);
int buffer_fixture_helper_6(struct buffer_head *bh);
int buffer_fixture_helper_7(struct buffer_head *bh);
int buffer_fixture_helper_8(struct buffer_head *bh);
int buffer_fixture_helper_9(struct buffer_head *bh);
int buffer_fixture_helper_10(struct buffer_head *bh);
int buffer_fixture_helper_11(struct buffer_head *bh);
int buffer_fixture_helper_12(struct buffer_head *bh);
int buffer_fixture_helper_13(struct buffer_head *bh);
int buffer_fixture_helper_14(struct buffer_head *bh);
int buffer_fixture_helper_15(struct buffer_head *bh);
int buffer_fixture_helper_16(struct buffer_head *bh);
int buffer_fixture_helper_17(struct buffer_head *bh);
int buffer_fixture_helper_18(struct buffer_head *bh);
int buffer_fixture_helper_19(struct buffer_head *bh);
int buffer_fixture_helper_20(struct buffer_head *bh);
int buffer_fixture_helper_21(struct buffer_head *bh);
int buffer_fixture_helper_22(struct buffer_head *bh);
int buffer_fixture_helper_23(struct buffer_head *bh);
int buffer_fixture_helper_24(struct buffer_head *bh);
int buffer_fixture_helper_25(struct buffer_head *bh);
int buffer_fixture_helper_26(struct buffer_head *bh);
int buffer_fixture_helper_27(struct buffer_head *bh);
int buffer_fixture_helper_28(struct buffer_head *bh);
int buffer_fixture_helper_29(struct buffer_head *bh);
int buffer_fixture_helper_30(struct buffer_head *bh);
int buffer_fixture_helper_31(struct buffer_head *bh);
int buffer_fixture_helper_32(struct buffer_head *bh);
int buffer_fixture_helper_33(struct buffer_head *bh);
int buffer_fixture_helper_34(struct buffer_head *bh);
int buffer_fixture_helper_35(struct buffer_head *bh);
int buffer_fixture_helper_36(struct buffer_head *bh);
int buffer_fixture_helper_37(struct buffer_head *bh);
int buffer_fixture_helper_38(struct buffer_head *bh);
int buffer_fixture_helper_39(struct buffer_head *bh);
int buffer_fixture_helper_40(struct buffer_head *bh);
int buffer_fixture_helper_41(struct buffer_head *bh);
int buffer_fixture_helper_42(struct buffer_head *bh);
int buffer_fixture_helper_43(struct buffer_head *bh);
int buffer_fixture_helper_44(struct buffer_head *bh);
int buffer_fixture_helper_45(struct buffer_head *bh);
int buffer_fixture_helper_46(struct buffer_head *bh);
int buffer_fixture_helper_47(struct buffer_head *bh);
int buffer_fixture_helper_48(struct buffer_head *bh);
int buffer_fixture_helper_49(struct buffer_head *bh);
int buffer_fixture_helper_50(struct buffer_head *bh);
int buffer_fixture_helper_51(struct buffer_head *bh);
int buffer_fixture_helper_52(struct buffer_head *bh);
int buffer_fixture_helper_53(struct buffer_head *bh);
int buffer_fixture_helper_54(struct buffer_head *bh);
int buffer_fixture_helper_55(struct buffer_head *bh);
int buffer_fixture_helper_56(struct buffer_head *bh);
int buffer_fixture_helper_57(struct buffer_head *bh);
int buffer_fixture_helper_58(struct buffer_head *bh);
int buffer_fixture_helper_59(struct buffer_head *bh);
int buffer_fixture_helper_60(struct buffer_head *bh);
int buffer_fixture_helper_61(struct buffer_head *bh);
int buffer_fixture_helper_62(struct buffer_head *bh);
int buffer_fixture_helper_63(struct buffer_head *bh);
int buffer_fixture_helper_64(struct buffer_head *bh);
int buffer_fixture_helper_65(struct buffer_head *bh);
int buffer_fixture_helper_66(struct buffer_head *bh);
int buffer_fixture_helper_67(struct buffer_head *bh);
int buffer_fixture_helper_68(struct buffer_head *bh);
int buffer_fixture_helper_69(struct buffer_head *bh);
int buffer_fixture_helper_70(struct buffer_head *bh);
int buffer_fixture_helper_71(struct buffer_head *bh);
int buffer_fixture_helper_72(struct buffer_head *bh);
int buffer_fixture_helper_73(struct buffer_head *bh);
int buffer_fixture_helper_74(struct buffer_head *bh);
int buffer_fixture_helper_75(struct buffer_head *bh);
int buffer_fixture_helper_76(struct buffer_head *bh);
int buffer_fixture_helper_77(struct buffer_head *bh);
int buffer_fixture_helper_78(struct buffer_head *bh);
int buffer_fixture_helper_79(struct buffer_head *bh);
int buffer_fixture_helper_80(struct buffer_head *bh);
int buffer_fixture_helper_81(struct buffer_head *bh);
int buffer_fixture_helper_82(struct buffer_head *bh);
int buffer_fixture_helper_83(struct buffer_head *bh);
int buffer_fixture_helper_84(struct buffer_head *bh);
int buffer_fixture_helper_85(struct buffer_head *bh);
int buffer_fixture_helper_86(struct buffer_head *bh);
int buffer_fixture_helper_87(struct buffer_head *bh);
int buffer_fixture_helper_88(struct buffer_head *bh);
int buffer_fixture_helper_89(struct buffer_head *bh);
int buffer_fixture_helper_90(struct buffer_head *bh);
int buffer_fixture_helper_91(struct buffer_head *bh);
int buffer_fixture_helper_92(struct buffer_head *bh);
int buffer_fixture_helper_93(struct buffer_head *bh);
int buffer_fixture_helper_94(struct buffer_head *bh);
int buffer_fixture_helper_95(struct buffer_head *bh);
int buffer_fixture_helper_96(struct buffer_head *bh);
int buffer_fixture_helper_97(struct buffer_head *bh);
int buffer_fixture_helper_98(struct buffer_head *bh);
int buffer_fixture_helper_99(struct buffer_head *bh);
int buffer_fixture_helper_100(struct buffer_head *bh);
int buffer_fixture_helper_101(struct buffer_head *bh);
int buffer_fixture_helper_102(struct buffer_head *bh);
int buffer_fixture_helper_103(struct buffer_head *bh);
int buffer_fixture_helper_104(struct buffer_head *bh);
int buffer_fixture_helper_105(struct buffer_head *bh);
int buffer_fixture_helper_106(struct buffer_head *bh);
int buffer_fixture_helper_107(struct buffer_head *bh);
int buffer_fixture_helper_108(struct buffer_head *bh);
int buffer_fixture_helper_109(struct buffer_head *bh);
int buffer_fixture_helper_110(struct buffer_head *bh);
int buffer_fixture_helper_111(struct buffer_head *bh);
int buffer_fixture_helper_112(struct buffer_head *bh);
int buffer_fixture_helper_113(struct buffer_head *bh);
int buffer_fixture_helper_114(struct buffer_head *bh);
int buffer_fixture_helper_115(struct buffer_head *bh);
int buffer_fixture_helper_116(struct buffer_head *bh);
int buffer_fixture_helper_117(struct buffer_head *bh);
int buffer_fixture_helper_118(struct buffer_head *bh);
int buffer_fixture_helper_119(struct buffer_head *bh);
int buffer_fixture_helper_120(struct buffer_head *bh);
int buffer_fixture_helper_121(struct buffer_head *bh);
int buffer_fixture_helper_122(struct buffer_head *bh);
int buffer_fixture_helper_123(struct buffer_head *bh);
int buffer_fixture_helper_124(struct buffer_head *bh);
int buffer_fixture_helper_125(struct buffer_head *bh);
int buffer_fixture_helper_126(struct buffer_head *bh);
int buffer_fixture_helper_127(struct buffer_head *bh);
int buffer_fixture_helper_128(struct buffer_head *bh);
int buffer_fixture_helper_129(struct buffer_head *bh);
int buffer_fixture_helper_130(struct buffer_head *bh);
int buffer_fixture_helper_131(struct buffer_head *bh);
int buffer_fixture_helper_132(struct buffer_head *bh);
int buffer_fixture_helper_133(struct buffer_head *bh);
int buffer_fixture_helper_134(struct buffer_head *bh);
int buffer_fixture_helper_135(struct buffer_head *bh);
int buffer_fixture_helper_136(struct buffer_head *bh);
int buffer_fixture_helper_137(struct buffer_head *bh);
int buffer_fixture_helper_138(struct buffer_head *bh);
int buffer_fixture_helper_139(struct buffer_head *bh);
int buffer_fixture_helper_140(struct buffer_head *bh);
int buffer_fixture_helper_141(struct buffer_head *bh);
int buffer_fixture_helper_142(struct buffer_head *bh);
int buffer_fixture_helper_143(struct buffer_head *bh);
int buffer_fixture_helper_144(struct buffer_head *bh);
int buffer_fixture_helper_145(struct buffer_head *bh);
int buffer_fixture_helper_146(struct buffer_head *bh);
int buffer_fixture_helper_147(struct buffer_head *bh);
int buffer_fixture_helper_148(struct buffer_head *bh);
int buffer_fixture_helper_149(struct buffer_head *bh);
int buffer_fixture_helper_150(struct buffer_head *bh);
int buffer_fixture_helper_151(struct buffer_head *bh);
int buffer_fixture_helper_152(struct buffer_head *bh);
int buffer_fixture_helper_153(struct buffer_head *bh);
int buffer_fixture_helper_154(struct buffer_head *bh);
int buffer_fixture_helper_155(struct buffer_head *bh);
int buffer_fixture_helper_156(struct buffer_head *bh);
int buffer_fixture_helper_157(struct buffer_head *bh);
int buffer_fixture_helper_158(struct buffer_head *bh);
int buffer_fixture_helper_159(struct buffer_head *bh);
int buffer_fixture_helper_160(struct buffer_head *bh);
int buffer_fixture_helper_161(struct buffer_head *bh);
int buffer_fixture_helper_162(struct buffer_head *bh);
int buffer_fixture_helper_163(struct buffer_head *bh);
int buffer_fixture_helper_164(struct buffer_head *bh);
int buffer_fixture_helper_165(struct buffer_head *bh);
int buffer_fixture_helper_166(struct buffer_head *bh);
int buffer_fixture_helper_167(struct buffer_head *bh);
int buffer_fixture_helper_168(struct buffer_head *bh);
int buffer_fixture_helper_169(struct buffer_head *bh);
int buffer_fixture_helper_170(struct buffer_head *bh);
int buffer_fixture_helper_171(struct buffer_head *bh);
int buffer_fixture_helper_172(struct buffer_head *bh);
int buffer_fixture_helper_173(struct buffer_head *bh);
int buffer_fixture_helper_174(struct buffer_head *bh);
int buffer_fixture_helper_175(struct buffer_head *bh);
int buffer_fixture_helper_176(struct buffer_head *bh);
int buffer_fixture_helper_177(struct buffer_head *bh);
int buffer_fixture_helper_178(struct buffer_head *bh);
int buffer_fixture_helper_179(struct buffer_head *bh);
int buffer_fixture_helper_180(struct buffer_head *bh);
int buffer_fixture_helper_181(struct buffer_head *bh);
int buffer_fixture_helper_182(struct buffer_head *bh);
int buffer_fixture_helper_183(struct buffer_head *bh);
int buffer_fixture_helper_184(struct buffer_head *bh);
int buffer_fixture_helper_185(struct buffer_head *bh);
int buffer_fixture_helper_186(struct buffer_head *bh);
int buffer_fixture_helper_187(struct buffer_head *bh);
int buffer_fixture_helper_188(struct buffer_head *bh);
int buffer_fixture_helper_189(struct buffer_head *bh);
int buffer_fixture_helper_190(struct buffer_head *bh);
int buffer_fixture_helper_191(struct buffer_head *bh);
int buffer_fixture_helper_192(struct buffer_head *bh);
int buffer_fixture_helper_193(struct buffer_head *bh);
int buffer_fixture_helper_194(struct buffer_head *bh);
int buffer_fixture_helper_195(struct buffer_head *bh);
int buffer_fixture_helper_196(struct buffer_head *bh);
int buffer_fixture_helper_197(struct buffer_head *bh);
int buffer_fixture_helper_198(struct buffer_head *bh);
int buffer_fixture_helper_199(struct buffer_head *bh);
int buffer_fixture_helper_200(struct buffer_head *bh);
int buffer_fixture_helper_201(struct buffer_head *bh);
int buffer_fixture_helper_202(struct buffer_head *bh);
int buffer_fixture_helper_203(struct buffer_head *bh);
int buffer_fixture_helper_204(struct buffer_head *bh);
int buffer_fixture_helper_205(struct buffer_head *bh);
int buffer_fixture_helper_206(struct buffer_head *bh);
int buffer_fixture_helper_207(struct buffer_head *bh);
int buffer_fixture_helper_208(struct buffer_head *bh);
int buffer_fixture_helper_209(struct buffer_head *bh);
int buffer_fixture_helper_210(struct buffer_head *bh);
int buffer_fixture_helper_211(struct buffer_head *bh);
int buffer_fixture_helper_212(struct buffer_head *bh);
int buffer_fixture_helper_213(struct buffer_head *bh);
int buffer_fixture_helper_214(struct buffer_head *bh);
int buffer_fixture_helper_215(struct buffer_head *bh);
int buffer_fixture_helper_216(struct buffer_head *bh);
int buffer_fixture_helper_217(struct buffer_head *bh);
int buffer_fixture_helper_218(struct buffer_head *bh);
int buffer_fixture_helper_219(struct buffer_head *bh);
int buffer_fixture_helper_220(struct buffer_head *bh);
int buffer_fixture_helper_221(struct buffer_head *bh);
int buffer_fixture_helper_222(struct buffer_head *bh);
int buffer_fixture_helper_223(struct buffer_head *bh);
int buffer_fixture_helper_224(struct buffer_head *bh);
int buffer_fixture_helper_225(struct buffer_head *bh);
int buffer_fixture_helper_226(struct buffer_head *bh);
int buffer_fixture_helper_227(struct buffer_head *bh);
int buffer_fixture_helper_228(struct buffer_head *bh);
int buffer_fixture_helper_229(struct buffer_head *bh);

static inline int trylock_buffer(struct buffer_head *bh)
{
	return likely(!test_and_set_bit_lock(BH_Lock, &bh->b_state));
}

static inline void lock_buffer(struct buffer_head *bh)
{
	might_sleep();
	if (!trylock_buffer(bh))
		__lock_buffer(bh);
}

static inline struct buffer_head *getblk_unmovable(struct block_device *bdev,
						   sector_t block,
						   unsigned size)
{
	return __getblk_gfp(bdev, block, size, 0);
}

#endif /* _LINUX_BUFFER_HEAD_H */
